#include "exidx/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exidx/errors.hpp"

namespace exidx {

namespace {

struct WindowContext {
  double level = 0.0;
  long r = 0;
};

WindowContext window_context(const Series& series, int k, double tau, double s) {
  if (k < 1) throw std::invalid_argument("local dependence order k must be at least 1");
  const auto kn = kn_value(series.size(), s);
  if (kn.rn < k) {
    throw std::invalid_argument("window length r_n = " + std::to_string(kn.rn) +
                                " is shorter than k = " + std::to_string(k));
  }
  WindowContext ctx;
  ctx.level = resolve_level(series, LevelSpec::normalized(tau));
  ctx.r = kn.rn;
  return ctx;
}

// Shared scan for p_k and d_k. For each 1-based j in 1..n-r+1 with X_j > u,
// checks the run X_{j+1..j+k-1} <= u and, for p_k, a later exceedance within
// j+k..j+r-1.
struct ScanCounts {
  long run_starts = 0;       // d_k events
  long anti_events = 0;      // p_k numerator events
  long exceedances_all = 0;  // denominator: exceedances anywhere in 1..n
};

ScanCounts scan(const Series& series, int k, const WindowContext& ctx) {
  const std::size_t n = series.size();
  const auto r = static_cast<std::size_t>(ctx.r);
  const double u = ctx.level;
  ScanCounts counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (series[i] > u) ++counts.exceedances_all;
  }
  const std::size_t last_start = n - r;  // 0-based: j-1 ranges over 0..n-r
  for (std::size_t i = 0; i <= last_start; ++i) {
    if (!(series[i] > u)) continue;
    bool quiet_run = true;
    for (std::size_t s_ = 1; s_ < static_cast<std::size_t>(k); ++s_) {
      if (series[i + s_] > u) {
        quiet_run = false;
        break;
      }
    }
    if (!quiet_run) continue;
    ++counts.run_starts;
    for (std::size_t s_ = static_cast<std::size_t>(k); s_ < r; ++s_) {
      if (series[i + s_] > u) {
        ++counts.anti_events;
        break;
      }
    }
  }
  return counts;
}

double anti_proportion(const Series& series, int k, double tau, double s) {
  const auto ctx = window_context(series, k, tau, s);
  const auto counts = scan(series, k, ctx);
  if (counts.exceedances_all == 0) {
    throw NoExceedancesError("anti-D(k) proportion: no exceedances of the level");
  }
  return static_cast<double>(counts.anti_events) / static_cast<double>(counts.exceedances_all);
}

}  // namespace

KnValue kn_value(std::size_t n, double s) {
  if (n < 3) throw std::invalid_argument("k_n requires n >= 3");
  if (!(s > 0.0)) throw std::invalid_argument("k_n exponent s must be positive");
  const double kn = std::floor(std::pow(std::log(static_cast<double>(n)), s));
  if (kn < 1.0) {
    throw std::invalid_argument("k_n = floor((log n)^s) is zero; n too small for s");
  }
  KnValue out;
  out.kn = static_cast<long>(kn);
  out.rn = static_cast<long>(n / static_cast<std::size_t>(out.kn));
  return out;
}

std::string to_string(DiagnosticStat stat) {
  return stat == DiagnosticStat::Proportion ? "p" : "d";
}

double anti_dk_proportion(const Series& series, int k, double tau, double s) {
  if (k < 2) throw std::invalid_argument("anti-D(k) proportion requires k >= 2");
  return anti_proportion(series, k, tau, s);
}

double anti_d1_proportion(const Series& series, double tau, double s) {
  return anti_proportion(series, 1, tau, s);
}

long dk_count(const Series& series, int k, double tau, double s) {
  const auto ctx = window_context(series, k, tau, s);
  const auto counts = scan(series, k, ctx);
  if (counts.exceedances_all == 0) {
    throw NoExceedancesError("d_k count: no exceedances of the level");
  }
  return counts.run_starts;
}

std::vector<DiagnosticPoint> trajectory(const Series& series, int k, double tau, double s,
                                        const std::vector<std::size_t>& grid,
                                        DiagnosticStat stat) {
  if (grid.empty()) throw std::invalid_argument("trajectory grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0 || grid[i] > series.size()) {
      throw std::invalid_argument("grid prefix length out of range");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw std::invalid_argument("grid prefix lengths must be strictly increasing");
    }
  }

  std::vector<DiagnosticPoint> points;
  points.reserve(grid.size());
  for (std::size_t m : grid) {
    DiagnosticPoint point;
    point.m = m;
    point.k = k;
    point.tau = tau;
    point.s = s;
    point.stat = stat;
    try {
      const Series prefix = series.prefix(m);
      point.r = kn_value(m, s).rn;
      if (stat == DiagnosticStat::Proportion) {
        point.value = k == 1 ? anti_d1_proportion(prefix, tau, s)
                             : anti_dk_proportion(prefix, k, tau, s);
      } else {
        point.value = static_cast<double>(dk_count(prefix, k, tau, s));
      }
    } catch (const std::exception&) {
      point.value.reset();
    }
    points.push_back(point);
  }
  return points;
}

std::vector<std::size_t> default_grid(std::size_t n, int k, double tau, double s,
                                      std::size_t min_m, int points) {
  if (points < 1) throw std::invalid_argument("grid needs at least one point");
  // Smallest prefix on which the statistic is defined: tau resolves and the
  // window covers k positions.
  std::size_t start = 0;
  for (std::size_t m = std::max<std::size_t>(3, static_cast<std::size_t>(tau) + 1); m <= n; ++m) {
    try {
      if (kn_value(m, s).rn >= std::max(k, 2)) {
        start = m;
        break;
      }
    } catch (const std::invalid_argument&) {
    }
  }
  if (start == 0) throw std::invalid_argument("series too short for any diagnostic prefix");
  start = std::max(start, std::min(min_m, n));
  if (start > n) start = n;

  std::vector<std::size_t> grid;
  const double log_start = std::log(static_cast<double>(start));
  const double log_end = std::log(static_cast<double>(n));
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    const auto m = static_cast<std::size_t>(
        std::llround(std::exp(log_start + frac * (log_end - log_start))));
    if (grid.empty() || m > grid.back()) grid.push_back(std::min(m, n));
  }
  if (grid.back() != n) grid.push_back(n);
  return grid;
}

KSelectionReport k_selection_report(const Series& series, int k_max, double tau, double s,
                                    double gap_threshold) {
  if (k_max < 2) throw std::invalid_argument("k selection requires k_max >= 2");
  if (!(gap_threshold > 0.0)) throw std::invalid_argument("gap threshold must be positive");

  // d_k up to k_max+1 so the forward gap at k_max is defined.
  std::vector<long> d(static_cast<std::size_t>(k_max) + 2, 0);
  for (int k = 1; k <= k_max + 1; ++k) d[static_cast<std::size_t>(k)] = dk_count(series, k, tau, s);
  const double d1 = static_cast<double>(d[1]);
  if (d1 <= 0.0) throw NoExceedancesError("k selection: no exceedances in the scan range");

  KSelectionReport report;
  report.threshold = gap_threshold;
  report.tau = tau;
  report.s = s;
  report.note =
      "heuristic: trajectory plots suggest k but do not decide it; "
      "recommendation is the smallest k with (d_k - d_{k+1})/d_1 < threshold";

  for (int k = 1; k <= k_max; ++k) {
    KSelectionRow row;
    row.k = k;
    row.d = d[static_cast<std::size_t>(k)];
    try {
      row.p = k == 1 ? anti_d1_proportion(series, tau, s)
                     : anti_dk_proportion(series, k, tau, s);
    } catch (const DegeneracyError&) {
      row.p.reset();
    }
    if (k >= 2) {
      row.gap_from_previous =
          static_cast<double>(d[static_cast<std::size_t>(k) - 1] - d[static_cast<std::size_t>(k)]) / d1;
    }
    report.rows.push_back(row);
  }

  report.recommended_k = k_max;
  report.gap_below_threshold = false;
  for (int k = 1; k <= k_max; ++k) {
    const double forward_gap =
        static_cast<double>(d[static_cast<std::size_t>(k)] - d[static_cast<std::size_t>(k) + 1]) / d1;
    if (forward_gap < gap_threshold) {
      report.recommended_k = k;
      report.gap_below_threshold = true;
      break;
    }
  }
  return report;
}

}  // namespace exidx
