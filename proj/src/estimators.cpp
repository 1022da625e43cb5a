#include "exidx/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "exidx/errors.hpp"

namespace exidx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

ThetaEstimate make_estimate(double raw, EstimatorId id, std::optional<int> k, double level,
                            std::size_t n_exceedances) {
  ThetaEstimate est;
  est.raw = raw;
  est.value = clip01(raw);
  est.id = id;
  est.k = k;
  est.level = level;
  est.n_exceedances = n_exceedances;
  return est;
}

// Ordinal ranks 1..n, ties broken by first occurrence.
std::vector<std::size_t> ordinal_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

}  // namespace

std::string to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::Runs: return "runs";
    case EstimatorId::Intervals: return "intervals";
    case EstimatorId::Upcross: return "upcross";
    case EstimatorId::MaxLik: return "ml";
    case EstimatorId::Tdc: return "tdc";
    case EstimatorId::MaxMoment: return "max-moment";
    case EstimatorId::MaxMomentScaled: return "max-moment-scaled";
    case EstimatorId::CycleDirect: return "cycle-direct";
    case EstimatorId::CycleUpcross: return "cycle-upcross";
    case EstimatorId::CycleIntervals: return "cycle-intervals";
    case EstimatorId::CycleMaxLik: return "cycle-ml";
    case EstimatorId::CycleMaxMoment: return "cycle-max-moment";
    case EstimatorId::CycleTdc: return "cycle-tdc";
  }
  throw std::invalid_argument("unknown estimator id");
}

EstimatorId estimator_from_string(const std::string& name) {
  if (name == "runs") return EstimatorId::Runs;
  if (name == "intervals") return EstimatorId::Intervals;
  if (name == "upcross") return EstimatorId::Upcross;
  if (name == "ml") return EstimatorId::MaxLik;
  if (name == "tdc") return EstimatorId::Tdc;
  if (name == "max-moment") return EstimatorId::MaxMoment;
  if (name == "max-moment-scaled") return EstimatorId::MaxMomentScaled;
  if (name == "cycle-direct") return EstimatorId::CycleDirect;
  if (name == "cycle-upcross") return EstimatorId::CycleUpcross;
  if (name == "cycle-intervals") return EstimatorId::CycleIntervals;
  if (name == "cycle-ml") return EstimatorId::CycleMaxLik;
  if (name == "cycle-max-moment") return EstimatorId::CycleMaxMoment;
  if (name == "cycle-tdc") return EstimatorId::CycleTdc;
  throw ConfigError("unknown estimator name: " + name);
}

ThetaEstimate runs_estimator(const Series& series, double level, int run) {
  if (run < 1) throw std::invalid_argument("runs estimator requires run >= 1");
  const std::size_t n = series.size();
  std::size_t n_exc = 0;
  std::size_t n_runs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(series[i] > level)) continue;
    ++n_exc;
    bool quiet = true;
    const std::size_t end = std::min(n, i + static_cast<std::size_t>(run));
    for (std::size_t s = i + 1; s < end; ++s) {
      if (series[s] > level) {
        quiet = false;
        break;
      }
    }
    if (quiet) ++n_runs;
  }
  if (n_exc == 0) throw NoExceedancesError("runs estimator: no exceedances of the level");
  const double raw = static_cast<double>(n_runs) / static_cast<double>(n_exc);
  return make_estimate(raw, EstimatorId::Runs, std::nullopt, level, n_exc);
}

ThetaEstimate upcrossings_estimator(const Series& series, double level) {
  const auto summary = exceedance_summary(series, level);
  if (summary.count == 0) {
    throw NoExceedancesError("upcrossings estimator: no exceedances of the level");
  }
  const double raw =
      static_cast<double>(upcrossing_count(series, level)) / static_cast<double>(summary.count);
  return make_estimate(raw, EstimatorId::Upcross, std::nullopt, level, summary.count);
}

ThetaEstimate intervals_estimator(const Series& series, double level) {
  const auto summary = exceedance_summary(series, level);
  if (summary.count < 2) {
    throw InsufficientDataError("intervals estimator requires at least two exceedances");
  }
  const auto& times = summary.interexceedance_times;
  const auto n_times = static_cast<double>(times.size());
  const std::size_t max_time = *std::max_element(times.begin(), times.end());

  double raw;
  if (max_time <= 2) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t : times) {
      const auto x = static_cast<double>(t);
      sum += x;
      sum_sq += x * x;
    }
    if (sum_sq == 0.0) throw DegeneracyError("intervals estimator: degenerate interexceedance times");
    raw = 2.0 * sum * sum / (n_times * sum_sq);
  } else {
    double sum = 0.0, sum_prod = 0.0;
    for (std::size_t t : times) {
      const auto x = static_cast<double>(t);
      sum += x - 1.0;
      sum_prod += (x - 1.0) * (x - 2.0);
    }
    if (sum_prod == 0.0) throw DegeneracyError("intervals estimator: degenerate interexceedance times");
    raw = 2.0 * sum * sum / (n_times * sum_prod);
  }
  return make_estimate(raw, EstimatorId::Intervals, std::nullopt, level, summary.count);
}

ThetaEstimate ml_estimator(const Series& series, double level) {
  const auto summary = exceedance_summary(series, level);
  if (summary.count < 2) {
    throw InsufficientDataError("ml estimator requires at least two exceedances");
  }
  const double q = static_cast<double>(summary.count) / static_cast<double>(series.size());
  double scaled_gap_sum = 0.0;  // sum of q*(T_i - 1)
  std::size_t n_cluster_gaps = 0;  // gaps with T_i > 1
  for (std::size_t t : summary.interexceedance_times) {
    const double s = static_cast<double>(t) - 1.0;
    scaled_gap_sum += q * s;
    if (s != 0.0) ++n_cluster_gaps;
  }

  double raw = 0.0;
  if (scaled_gap_sum > 0.0) {
    const auto n_times = static_cast<double>(summary.interexceedance_times.size());
    const auto nc = static_cast<double>(n_cluster_gaps);
    const double b = scaled_gap_sum + n_times + nc;
    const double disc = b * b - 8.0 * nc * scaled_gap_sum;
    raw = (b - std::sqrt(std::max(disc, 0.0))) / (2.0 * scaled_gap_sum);
  }
  return make_estimate(raw, EstimatorId::MaxLik, std::nullopt, level, summary.count);
}

double tdc_estimator(const CycleSeries& cycles, double upper_fraction) {
  if (!(upper_fraction > 0.0 && upper_fraction < 1.0)) {
    throw std::invalid_argument("tdc upper_fraction must lie in (0,1)");
  }
  const std::size_t m = cycles.values.size();
  if (m < 3) throw InsufficientDataError("tdc estimator requires at least three cycles");

  const std::size_t n_pairs = m - 1;
  std::vector<double> first(cycles.values.begin(), cycles.values.end() - 1);
  std::vector<double> second(cycles.values.begin() + 1, cycles.values.end());
  const auto ranks_first = ordinal_ranks(first);
  const auto ranks_second = ordinal_ranks(second);

  auto top = static_cast<std::size_t>(
      std::ceil(upper_fraction * static_cast<double>(n_pairs) - 1e-12));
  if (top < 1) top = 1;
  if (top > n_pairs) top = n_pairs;

  std::size_t joint = 0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    if (ranks_first[i] > n_pairs - top && ranks_second[i] > n_pairs - top) ++joint;
  }
  return static_cast<double>(joint) / static_cast<double>(top);
}

ThetaEstimate max_moment_theta(const CycleSeries& cycles) {
  const std::size_t m = cycles.values.size();
  if (m < 3) throw InsufficientDataError("max-moment estimator requires at least three cycles");

  std::vector<double> sorted = cycles.values;
  std::sort(sorted.begin(), sorted.end());
  const auto scale = static_cast<double>(m + 1);

  double mean_df = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double pair_max = std::max(cycles.values[i], cycles.values[i + 1]);
    const auto below =
        std::upper_bound(sorted.begin(), sorted.end(), pair_max) - sorted.begin();
    mean_df += static_cast<double>(below) / scale;
  }
  mean_df /= static_cast<double>(m - 1);

  if (!(mean_df < 1.0)) throw DegeneracyError("max-moment estimator: empirical df mean reached 1");
  const double raw = 1.0 / (1.0 - mean_df) - 2.0;
  return make_estimate(raw, EstimatorId::MaxMoment, cycles.k, kNaN, 0);
}

Series to_unit_frechet(const Series& series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("unit Frechet transform requires n >= 2");
  const auto ranks = ordinal_ranks(series.values());
  std::vector<double> out(n);
  const auto scale = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = -1.0 / std::log(static_cast<double>(ranks[i]) / scale);
  }
  return Series(std::move(out));
}

ThetaEstimate max_moment_scaled_theta(const Series& unit_frechet_series, int k) {
  if (k < 3) throw std::invalid_argument("scaled max-moment estimator requires k >= 3");
  const CycleSeries cycles = block_cycles(unit_frechet_series, k);
  std::size_t below_one = 0;
  for (double z : cycles.values) {
    if (z <= 1.0) ++below_one;
  }
  if (below_one == 0) {
    throw DegeneracyError("scaled max-moment estimator: no cycle maxima at or below 1");
  }
  const double df_at_one = static_cast<double>(below_one) / static_cast<double>(cycles.m);
  const ThetaEstimate theta_z = max_moment_theta(cycles);
  const double raw = theta_z.value * (-std::log(df_at_one)) / static_cast<double>(k - 1);
  return make_estimate(raw, EstimatorId::MaxMomentScaled, k, kNaN, cycles.m - below_one);
}

namespace {

struct CycleCounts {
  double level = 0.0;
  CycleSeries cycles;
  std::size_t n_exc_source = 0;  // N^X
  std::size_t n_exc_cycles = 0;  // N^Z
};

CycleCounts cycle_counts(const Series& series, int k, const LevelSpec& spec,
                         const char* which) {
  CycleCounts out;
  out.level = resolve_level(series, spec);
  out.cycles = block_cycles(series, k);
  out.n_exc_source = exceedance_summary(series, out.level).count;
  if (out.n_exc_source == 0) {
    throw NoExceedancesError(std::string(which) + ": no exceedances of the level");
  }
  for (double z : out.cycles.values) {
    if (z > out.level) ++out.n_exc_cycles;
  }
  return out;
}

}  // namespace

ThetaEstimate cycle_direct(const Series& series, int k, const LevelSpec& spec) {
  const auto counts = cycle_counts(series, k, spec, "cycle-direct");
  const double raw = static_cast<double>(upcrossing_count(counts.cycles.values, counts.level)) /
                     static_cast<double>(counts.n_exc_source);
  return make_estimate(raw, EstimatorId::CycleDirect, k, counts.level, counts.n_exc_source);
}

ThetaEstimate cycle_indirect(const Series& series, int k, const LevelSpec& spec,
                             BaseEstimator base) {
  const auto counts = cycle_counts(series, k, spec, "cycle-indirect");

  if (base == BaseEstimator::Upcross) {
    // U^Z/N^Z * N^Z/N^X collapses to U^Z/N^X; computing the collapsed form
    // keeps the identity with cycle_direct exact.
    const double raw = static_cast<double>(upcrossing_count(counts.cycles.values, counts.level)) /
                       static_cast<double>(counts.n_exc_source);
    return make_estimate(raw, EstimatorId::CycleUpcross, k, counts.level, counts.n_exc_source);
  }

  const Series z = counts.cycles.as_series();
  double theta_z = 0.0;
  EstimatorId id = EstimatorId::CycleIntervals;
  switch (base) {
    case BaseEstimator::Intervals:
      theta_z = intervals_estimator(z, counts.level).value;
      id = EstimatorId::CycleIntervals;
      break;
    case BaseEstimator::MaxLik:
      theta_z = ml_estimator(z, counts.level).value;
      id = EstimatorId::CycleMaxLik;
      break;
    case BaseEstimator::MaxMoment:
      theta_z = max_moment_theta(counts.cycles).value;
      id = EstimatorId::CycleMaxMoment;
      break;
    case BaseEstimator::Upcross:
      break;  // handled above
  }
  const double raw = theta_z * static_cast<double>(counts.n_exc_cycles) /
                     static_cast<double>(counts.n_exc_source);
  return make_estimate(raw, id, k, counts.level, counts.n_exc_source);
}

ThetaEstimate cycle_tdc(const Series& series, int k, const LevelSpec& spec,
                        double upper_fraction) {
  const auto counts = cycle_counts(series, k, spec, "cycle-tdc");
  const double lambda = tdc_estimator(counts.cycles, upper_fraction);
  const double raw = (1.0 - lambda) * static_cast<double>(counts.n_exc_cycles) /
                     static_cast<double>(counts.n_exc_source);
  return make_estimate(raw, EstimatorId::CycleTdc, k, counts.level, counts.n_exc_source);
}

}  // namespace exidx
