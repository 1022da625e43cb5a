#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "exidx/series.hpp"

namespace exidx {

// k_n = floor((log n)^s) with the natural log, and the induced window length
// r_n = floor(n / k_n).
struct KnValue {
  long kn = 0;
  long rn = 0;
};

KnValue kn_value(std::size_t n, double s);

enum class DiagnosticStat { Proportion, RunCount };

std::string to_string(DiagnosticStat stat);

// One evaluation of p_k or d_k on a prefix of length m. value is empty when
// the prefix was too short or degenerate for the statistic.
struct DiagnosticPoint {
  std::size_t m = 0;
  int k = 0;
  double tau = 0.0;
  double s = 0.0;
  long r = 0;
  DiagnosticStat stat = DiagnosticStat::Proportion;
  std::optional<double> value;
};

// Proportion of exceedances at position j (j <= n-r+1) that are followed by
// k-1 non-exceedances and then another exceedance inside the window
// j+k .. j+r-1, at the level resolved from tau and r = floor(n/k_n^(s)).
double anti_dk_proportion(const Series& series, int k, double tau, double s);

// Same with k = 1: any later exceedance in the window counts.
double anti_d1_proportion(const Series& series, double tau, double s);

// Number of j in 1..n-r+1 with X_j > u and the following k-1 values all at or
// below u (k = 1 counts every exceedance in range).
long dk_count(const Series& series, int k, double tau, double s);

// Evaluates the statistic on each prefix length of the grid; prefixes that
// cannot support it produce missing points.
std::vector<DiagnosticPoint> trajectory(const Series& series, int k, double tau, double s,
                                        const std::vector<std::size_t>& grid,
                                        DiagnosticStat stat = DiagnosticStat::Proportion);

// About `points` log-spaced prefix lengths from the first workable size
// (at least min_m) up to n.
std::vector<std::size_t> default_grid(std::size_t n, int k, double tau, double s,
                                      std::size_t min_m = 500, int points = 20);

struct KSelectionRow {
  int k = 0;
  long d = 0;
  std::optional<double> p;
  // (d_{k-1} - d_k) / d_1 for k >= 2.
  std::optional<double> gap_from_previous;
};

struct KSelectionReport {
  std::vector<KSelectionRow> rows;   // k = 1..k_max
  int recommended_k = 1;
  bool gap_below_threshold = true;   // false when no forward gap fell below it
  double threshold = 0.05;
  double tau = 0.0;
  double s = 0.0;
  std::string note;  // always flags the rule as a heuristic
};

// Terminal d_k / p_k values for k = 1..k_max and the smallest k whose forward
// gap (d_k - d_{k+1})/d_1 drops below the threshold. A heuristic reading of
// the trajectories, flagged as such in the output.
KSelectionReport k_selection_report(const Series& series, int k_max, double tau, double s,
                                    double gap_threshold = 0.05);

}  // namespace exidx
