#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exidx/errors.hpp"
#include "exidx/estimators.hpp"
#include "exidx/mm.hpp"
#include "exidx/rng.hpp"
#include "test_util.hpp"

using namespace exidx;

namespace {

MMSignature example_signature() {
  return MMSignature::single_row({Frac(2, 6), Frac(1, 6), Frac(3, 6)});
}

Series series_with_exceedances(std::size_t n, const std::vector<std::size_t>& positions) {
  std::vector<double> values(n, 0.0);
  for (std::size_t p : positions) values[p - 1] = 2.0;
  return Series(std::move(values));
}

}  // namespace

TEST_CASE("runs estimator hand counts") {
  const Series fixture({2, 0, 0, 2, 2, 0, 0, 0});
  const auto est = runs_estimator(fixture, 1.0, 2);
  CHECK(est.raw == doctest::Approx(2.0 / 3.0));
  CHECK(est.n_exceedances == 3);
  CHECK_FALSE(est.k.has_value());

  // isolated single exceedance, window running past the end counts as quiet
  for (int run : {1, 2, 5, 50}) {
    CHECK(runs_estimator(series_with_exceedances(10, {10}), 1.0, run).value == 1.0);
  }

  CHECK_THROWS_AS(runs_estimator(Series({0, 0, 0}), 1.0, 2), NoExceedancesError);
  CHECK_THROWS_AS(runs_estimator(fixture, 1.0, 0), std::invalid_argument);
}

TEST_CASE("runs estimator recovers theta on the worked moving-maxima model") {
  const Series x = mm_simulate(example_signature(), 10000, 20240801);
  const double level = empirical_quantile(x, 0.95);
  const auto est = runs_estimator(x, level, 3);
  CHECK(std::abs(est.value - 0.5) <= 0.06);
}

TEST_CASE("upcrossings estimator hand counts") {
  CHECK(upcrossings_estimator(Series({0, 2, 0, 2, 0}), 1.0).value == doctest::Approx(1.0));
  CHECK(upcrossings_estimator(Series({0, 2, 2, 2, 0}), 1.0).value == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(upcrossings_estimator(Series({0, 0}), 1.0), NoExceedancesError);
}

TEST_CASE("intervals estimator closed form") {
  // exceedances at 1,2,3,12: T = (1,1,9), max T > 2, so
  // raw = 2 (sum(T-1))^2 / ((N-1) sum (T-1)(T-2)) = 2*64 / (3*56)
  const auto est = intervals_estimator(series_with_exceedances(12, {1, 2, 3, 12}), 1.0);
  CHECK(est.raw == doctest::Approx(128.0 / 168.0));
  CHECK(est.value == doctest::Approx(128.0 / 168.0));

  // T = (1,1): first branch, raw = 2*(2^2)/(2*2) = 2, clipped to 1
  const auto clipped = intervals_estimator(series_with_exceedances(8, {3, 4, 5}), 1.0);
  CHECK(clipped.raw == doctest::Approx(2.0));
  CHECK(clipped.value == 1.0);

  CHECK_THROWS_AS(intervals_estimator(series_with_exceedances(8, {3}), 1.0),
                  InsufficientDataError);
}

TEST_CASE("ml estimator closed form") {
  // all gaps equal to one
  CHECK(ml_estimator(series_with_exceedances(9, {4, 5, 6}), 1.0).value == 0.0);

  // n=100, exceedances at 10, 11, 50: q=0.03, S=(0,38), N_C=1
  const auto est = ml_estimator(series_with_exceedances(100, {10, 11, 50}), 1.0);
  const double a = 0.03 * 38.0;
  const double b = a + 2.0 + 1.0;
  const double expected = (b - std::sqrt(b * b - 8.0 * 1.0 * a)) / (2.0 * a);
  CHECK(est.raw == doctest::Approx(expected));

  CHECK_THROWS_AS(ml_estimator(series_with_exceedances(9, {4}), 1.0), InsufficientDataError);
}

TEST_CASE("iid series push every interexceedance estimator toward one") {
  std::vector<double> upcross_means, intervals_means, ml_means;
  for (int rep = 0; rep < 100; ++rep) {
    const Series x = test::iid_uniform_series(10000, 1000, static_cast<std::uint64_t>(rep));
    const double level = empirical_quantile(x, 0.95);
    upcross_means.push_back(upcrossings_estimator(x, level).value);
    intervals_means.push_back(intervals_estimator(x, level).value);
    ml_means.push_back(ml_estimator(x, level).value);
  }
  // at the 0.95 quantile the upcrossings ratio sits near F(u) = 0.95; the
  // independence band is [0.9, 1.0]
  CHECK(test::mean(upcross_means) >= 0.9);
  CHECK(test::mean(upcross_means) <= 1.0);
  CHECK(std::abs(test::mean(ml_means) - 1.0) <= 0.05);
  CHECK(std::abs(test::mean(intervals_means) - 1.0) <= 0.1);
}

TEST_CASE("tail dependence coefficient") {
  std::vector<double> increasing(100);
  std::iota(increasing.begin(), increasing.end(), 0.0);
  CycleSeries comonotone{increasing, 2, increasing.size()};
  CHECK(tdc_estimator(comonotone, 0.05) == doctest::Approx(1.0));

  CycleSeries independent{test::iid_uniform_series(10000, 21).values(), 2, 10000};
  CHECK(std::abs(tdc_estimator(independent, 0.05)) <= 0.05);

  CHECK_THROWS_AS(tdc_estimator(CycleSeries{{1.0, 2.0}, 2, 2}, 0.05), InsufficientDataError);
  CHECK_THROWS_AS(tdc_estimator(comonotone, 0.0), std::invalid_argument);
}

TEST_CASE("tail dependence of worked-model cycles matches 1 - theta_Z") {
  const Series x = mm_simulate(example_signature(), 10000, 99);
  const auto cycles = block_cycles(x, 3);
  CHECK(cycles.m == 5000);
  CHECK(std::abs(tdc_estimator(cycles, 0.05) - 0.4) <= 0.07);
}

TEST_CASE("max-moment estimator limits") {
  // independent cycles: E[F(max of pair)] = 2/3, theta -> 1
  CycleSeries independent{test::iid_uniform_series(10000, 31).values(), 2, 10000};
  const auto iid_est = max_moment_theta(independent);
  CHECK(std::abs(iid_est.raw - 1.0) <= 0.05);

  // comonotone consecutive pairs: E[F(max)] -> 1/2, theta -> 0
  std::vector<double> increasing(999);
  std::iota(increasing.begin(), increasing.end(), 0.0);
  const auto dep_est = max_moment_theta(CycleSeries{increasing, 2, increasing.size()});
  CHECK(dep_est.value <= 0.01);

  CHECK_THROWS_AS(max_moment_theta(CycleSeries{{1.0, 2.0}, 2, 2}), InsufficientDataError);
}

TEST_CASE("max-moment estimator on worked-model cycles") {
  const Series x = mm_simulate(example_signature(), 10000, 7);
  const auto est = max_moment_theta(block_cycles(x, 3));
  CHECK(std::abs(est.value - 0.6) <= 0.07);
}

TEST_CASE("unit Frechet rank transform") {
  const Series x = test::iid_uniform_series(1000, 17);
  const Series t = to_unit_frechet(x);
  std::vector<double> sorted = t.values();
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());  // distinct
  CHECK(*std::min_element(t.begin(), t.end()) > 0.0);

  const double top = *std::max_element(t.begin(), t.end());
  const auto n = static_cast<double>(x.size());
  CHECK(top == doctest::Approx(-1.0 / std::log(n / (n + 1.0))));

  const Series big = to_unit_frechet(test::iid_uniform_series(10000, 18));
  const double ks = test::ks_distance(big.values(),
                                      [](double v) { return std::exp(-1.0 / v); });
  CHECK(ks <= 0.02);
}

TEST_CASE("scaled max-moment estimator") {
  // iid unit Frechet input, k=3: F_Z(1) ~ exp(-2), theta_Z ~ 1, estimate ~ 1
  const Series x = test::iid_frechet_series(10000, 23);
  const auto est = max_moment_scaled_theta(to_unit_frechet(x), 3);
  CHECK(std::abs(est.raw - 1.0) <= 0.1);
  CHECK(est.value >= 0.9);

  // worked moving-maxima model: theta_X = 1/2
  const Series mm = mm_simulate(example_signature(), 10000, 29);
  const auto mm_est = max_moment_scaled_theta(to_unit_frechet(mm), 3);
  CHECK(std::abs(mm_est.value - 0.5) <= 0.1);

  CHECK_THROWS_AS(max_moment_scaled_theta(x, 2), std::invalid_argument);
}

TEST_CASE("cycle-direct estimator hand count and k=2 identity") {
  const auto est = cycle_direct(Series({2, 0, 0, 0, 2, 0}), 3, LevelSpec::absolute(1.0));
  CHECK(est.value == doctest::Approx(0.5));
  CHECK(est.k == 3);
  CHECK(est.n_exceedances == 2);

  const Series x = test::iid_uniform_series(500, 41);
  const double level = empirical_quantile(x, 0.9);
  CHECK(cycle_direct(x, 2, LevelSpec::absolute(level)).value ==
        upcrossings_estimator(x, level).value);

  CHECK_THROWS_AS(cycle_direct(Series({0, 0, 0}), 3, LevelSpec::absolute(1.0)),
                  NoExceedancesError);
}

TEST_CASE("cycle-indirect with upcrossings base equals cycle-direct exactly") {
  Rng rng(55);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> values(100 + rng.next_u64() % 400);
    for (auto& v : values) v = rng.uniform();
    const Series x{std::move(values)};
    const int k = 2 + static_cast<int>(rng.next_u64() % 5);
    const LevelSpec spec = LevelSpec::quantile(0.8 + 0.15 * rng.uniform());
    const auto direct = cycle_direct(x, k, spec);
    const auto indirect = cycle_indirect(x, k, spec, BaseEstimator::Upcross);
    CHECK(direct.value == indirect.value);
    CHECK(direct.raw == indirect.raw);
  }
}

TEST_CASE("cycle-tdc behavior") {
  // comonotone cycles force the estimate to zero whatever the counts
  std::vector<double> increasing(300);
  std::iota(increasing.begin(), increasing.end(), 1.0);
  const Series x{std::move(increasing)};
  const auto est = cycle_tdc(x, 2, LevelSpec::quantile(0.9), 0.05);
  CHECK(est.value == 0.0);

  // independent cycles with N^Z = N^X (k=2): estimate near one
  const Series iid = test::iid_uniform_series(10000, 61);
  const auto iid_est = cycle_tdc(iid, 2, LevelSpec::quantile(0.95), 0.05);
  CHECK(std::abs(iid_est.value - 1.0) <= 0.08);
}

TEST_CASE("estimates stay in [0,1] and keep the raw value") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> values(150);
    for (auto& v : values) v = rng.uniform();
    const Series x{std::move(values)};
    const double level = empirical_quantile(x, 0.85);
    for (const ThetaEstimate& est :
         {runs_estimator(x, level, 3), upcrossings_estimator(x, level),
          intervals_estimator(x, level), ml_estimator(x, level),
          cycle_direct(x, 3, LevelSpec::absolute(level)),
          cycle_indirect(x, 3, LevelSpec::absolute(level), BaseEstimator::MaxMoment),
          cycle_tdc(x, 3, LevelSpec::absolute(level), 0.05)}) {
      CHECK(est.value >= 0.0);
      CHECK(est.value <= 1.0);
      CHECK(est.value == doctest::Approx(std::min(1.0, std::max(0.0, est.raw))));
    }
  }
}

TEST_CASE("count-based estimators are invariant under monotone maps of series and level") {
  Rng rng(88);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> values(400);
    for (auto& v : values) v = rng.uniform();
    const Series x{values};
    std::vector<double> mapped(values.size());
    std::transform(values.begin(), values.end(), mapped.begin(),
                   [](double v) { return std::exp(3.0 * v) - 2.0; });
    const Series y{std::move(mapped)};
    const double u = empirical_quantile(x, 0.9);
    const double v = std::exp(3.0 * u) - 2.0;

    CHECK(runs_estimator(x, u, 3).value == runs_estimator(y, v, 3).value);
    CHECK(upcrossings_estimator(x, u).value == upcrossings_estimator(y, v).value);
    CHECK(intervals_estimator(x, u).value == intervals_estimator(y, v).value);
    CHECK(ml_estimator(x, u).value == ml_estimator(y, v).value);
    CHECK(cycle_direct(x, 4, LevelSpec::absolute(u)).value ==
          cycle_direct(y, 4, LevelSpec::absolute(v)).value);

    // rank-based statistics need no level adjustment at all
    const auto cx = block_cycles(x, 3);
    const auto cy = block_cycles(y, 3);
    CHECK(tdc_estimator(cx, 0.05) == tdc_estimator(cy, 0.05));
    CHECK(max_moment_theta(cx).value == max_moment_theta(cy).value);
  }
}

TEST_CASE("iid concentration bands for the estimator families") {
  std::vector<double> upcross, ml, max_moment, intervals, plugin_theta;
  for (int rep = 0; rep < 100; ++rep) {
    const Series x = test::iid_uniform_series(10000, 4242, static_cast<std::uint64_t>(rep));
    const double level = empirical_quantile(x, 0.95);
    upcross.push_back(upcrossings_estimator(x, level).value);
    ml.push_back(ml_estimator(x, level).value);
    intervals.push_back(intervals_estimator(x, level).value);
    max_moment.push_back(max_moment_theta(block_cycles(x, 2)).value);

    // pair-maximum plug-in on exact unit Frechet input
    const Series frechet = test::iid_frechet_series(10000, 555, static_cast<std::uint64_t>(rep));
    plugin_theta.push_back(max_moment_theta(block_cycles(frechet, 2)).value);
  }
  const double m_up = test::mean(upcross);
  const double m_ml = test::mean(ml);
  const double m_ff = test::mean(max_moment);
  const double m_iv = test::mean(intervals);
  CHECK(m_up >= 0.9);
  CHECK(m_up <= 1.0);
  CHECK(m_ml >= 0.9);
  CHECK(m_ml <= 1.0);
  CHECK(m_ff >= 0.9);
  CHECK(m_ff <= 1.0);
  CHECK(m_iv >= 0.85);
  CHECK(m_iv <= 1.0);
  // pair-maximum moment mean: E[F(X1 v X2)] -> 2/3 so the plug-in tends to 1
  CHECK(std::abs(test::mean(plugin_theta) - 1.0) <= 0.05);
}
