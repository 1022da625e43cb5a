#include <doctest.h>

#include <cmath>

#include "exidx/diagnostics.hpp"
#include "exidx/errors.hpp"
#include "exidx/mm.hpp"
#include "exidx/rng.hpp"
#include "test_util.hpp"

using namespace exidx;

namespace {

MMSignature example_signature() {
  return MMSignature::single_row({Frac(2, 6), Frac(1, 6), Frac(3, 6)});
}

Series spikes(std::size_t n, const std::vector<std::size_t>& positions) {
  std::vector<double> values(n, 0.0);
  for (std::size_t p : positions) values[p - 1] = 10.0;
  return Series(std::move(values));
}

}  // namespace

TEST_CASE("k_n family") {
  // floor((log 20)^3) = floor(26.88) = 26
  CHECK(kn_value(20, 3.0).kn == 26);
  // floor((log 10000)^3) = 781, r_n = floor(10000/781) = 12
  const auto kn = kn_value(10000, 3.0);
  CHECK(kn.kn == 781);
  CHECK(kn.rn == 12);

  CHECK_THROWS_AS(kn_value(2, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(kn_value(100, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kn_value(100, -1.0), std::invalid_argument);
}

TEST_CASE("anti-D(k) proportion on constructed fixtures") {
  // n=60, tau=4 resolves the level to 0 (56 zeros, 4 spikes). s=1 gives
  // k_n = floor(log 60) = 4 and r = 15. Spikes at 1 and 4 form the single
  // run-then-reappear pattern; 30 and 50 stay isolated.
  const Series fixture = spikes(60, {1, 4, 30, 50});
  CHECK(anti_dk_proportion(fixture, 3, 4.0, 1.0) == doctest::Approx(0.25));

  // single isolated exceedance
  CHECK(anti_dk_proportion(spikes(60, {30}), 3, 1.0, 1.0) == 0.0);

  // every exceedance immediately followed by another one: the quiet-run
  // condition never holds
  CHECK(anti_dk_proportion(spikes(60, {20, 21, 40, 41}), 2, 4.0, 1.0) == 0.0);

  CHECK_THROWS_AS(anti_dk_proportion(fixture, 1, 4.0, 1.0), std::invalid_argument);
  // r = 15 < k
  CHECK_THROWS_AS(anti_dk_proportion(fixture, 16, 4.0, 1.0), std::invalid_argument);
}

TEST_CASE("anti-D(k) proportion matches the literal formula on random data") {
  Rng rng(404);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> values(300);
    for (auto& v : values) v = rng.uniform();
    const Series x{values};
    const double tau = 10.0;
    const double s = 1.5;
    const int k = 1 + static_cast<int>(rng.next_u64() % 4);
    const auto kn = kn_value(x.size(), s);
    const double level = resolve_level(x, LevelSpec::normalized(tau));
    const double expected = test::brute_force_anti_dk(values, k, level, kn.rn);
    const double got = k == 1 ? anti_d1_proportion(x, tau, s) : anti_dk_proportion(x, k, tau, s);
    CHECK(got == doctest::Approx(expected));
  }
}

TEST_CASE("anti-D(1) proportion") {
  CHECK(anti_d1_proportion(spikes(60, {30}), 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(anti_d1_proportion(Series(std::vector<double>(50, 3.0)), 2.0, 1.0),
                  NoExceedancesError);

  // iid level tau=50 at n=10000: band frozen from a 20-replicate run of the
  // independent brute-force formula (window of 11 positions at tau/n = 0.005)
  std::vector<double> props;
  for (int rep = 0; rep < 20; ++rep) {
    const Series x = test::iid_uniform_series(10000, 909, static_cast<std::uint64_t>(rep));
    props.push_back(anti_d1_proportion(x, 50.0, 3.0));
  }
  const double m = test::mean(props);
  CHECK(m >= 0.03);
  CHECK(m <= 0.08);
}

TEST_CASE("d_k run counts") {
  // spec fixture: spikes at 1, 4, 5 with small r
  // n=24, tau=3 -> level 0; s=1 -> k_n = floor(log 24) = 3, r = 8
  const Series fixture = spikes(24, {1, 4, 5});
  CHECK(dk_count(fixture, 2, 3.0, 1.0) == 2);  // positions 1 and 5
  CHECK(dk_count(fixture, 1, 3.0, 1.0) == 3);  // every exceedance in range

  // d_1 equals the exceedance count over 1..n-r+1
  const Series tail_case = spikes(24, {1, 20});  // 20 > n-r+1 = 17
  CHECK(dk_count(tail_case, 1, 2.0, 1.0) == 1);

  Rng rng(505);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> values(400);
    for (auto& v : values) v = rng.uniform();
    const Series x{std::move(values)};
    long prev = dk_count(x, 1, 20.0, 1.5);
    for (int k = 2; k <= 6; ++k) {
      const long d = dk_count(x, k, 20.0, 1.5);
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("p_k is nonincreasing in k") {
  const Series x = mm_simulate(example_signature(), 10000, 33);
  double prev = anti_d1_proportion(x, 50.0, 3.0);
  for (int k = 2; k <= 6; ++k) {
    const double p = anti_dk_proportion(x, k, 50.0, 3.0);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("isolated exceedances give zero proportions for every k") {
  const Series fixture = spikes(200, {40, 120});  // far apart
  for (int k = 2; k <= 5; ++k) {
    CHECK(anti_dk_proportion(fixture, k, 2.0, 1.0) == 0.0);
  }
}

TEST_CASE("trajectory grid handling") {
  const Series x = mm_simulate(example_signature(), 4000, 44);
  const auto single = trajectory(x, 3, 50.0, 3.0, {x.size()});
  REQUIRE(single.size() == 1);
  REQUIRE(single[0].value.has_value());
  CHECK(*single[0].value == doctest::Approx(anti_dk_proportion(x, 3, 50.0, 3.0)));
  CHECK(single[0].m == x.size());

  // tiny prefixes produce missing points rather than failures
  const auto with_missing = trajectory(x, 3, 50.0, 3.0, {10, 60, x.size()});
  CHECK(with_missing.size() == 3);
  CHECK_FALSE(with_missing[0].value.has_value());
  CHECK(with_missing[2].value.has_value());

  CHECK_THROWS_AS(trajectory(x, 3, 50.0, 3.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(trajectory(x, 3, 50.0, 3.0, {200, 100}), std::invalid_argument);
  CHECK_THROWS_AS(trajectory(x, 3, 50.0, 3.0, {200, 9999999}), std::invalid_argument);

  const auto grid = default_grid(x.size(), 3, 50.0, 3.0);
  CHECK(grid.size() >= 2);
  CHECK(grid.back() == x.size());
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

  // run counts instead of proportions
  const auto counts = trajectory(x, 2, 50.0, 3.0, {x.size()}, DiagnosticStat::RunCount);
  REQUIRE(counts[0].value.has_value());
  CHECK(*counts[0].value == doctest::Approx(static_cast<double>(dk_count(x, 2, 50.0, 3.0))));
}

TEST_CASE("worked moving-maxima model: order 3 holds, order 2 fails") {
  const Series x = mm_simulate(example_signature(), 10000, 20240801);
  const double p2 = anti_dk_proportion(x, 2, 50.0, 3.0);
  const double p3 = anti_dk_proportion(x, 3, 50.0, 3.0);
  CHECK(p2 > 0.05);
  CHECK(p3 < 0.02);

  const auto report = k_selection_report(x, 6, 50.0, 3.0);
  CHECK(report.recommended_k == 3);
  CHECK(report.gap_below_threshold);
  CHECK(report.rows.size() == 6);
  CHECK(report.note.find("heuristic") != std::string::npos);
}

TEST_CASE("k selection on nearly independent data recommends order 1") {
  const Series x = test::iid_uniform_series(10000, 66);
  const auto report = k_selection_report(x, 5, 50.0, 3.0);
  CHECK(report.recommended_k == 1);
}
