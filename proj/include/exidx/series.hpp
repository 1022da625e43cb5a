#pragma once

#include <cstddef>
#include <vector>

namespace exidx {

// A finite real-valued sample. Construction rejects empty input and any
// NaN/infinite element; everything downstream may assume both.
class Series {
 public:
  explicit Series(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::vector<double>::const_iterator begin() const noexcept { return values_.begin(); }
  std::vector<double>::const_iterator end() const noexcept { return values_.end(); }

  // First m observations as a new Series (1 <= m <= size()).
  Series prefix(std::size_t m) const;

 private:
  std::vector<double> values_;
};

// A threshold given directly, as an empirical quantile probability, or as a
// normalized level tau (resolved to the empirical 1 - tau/n quantile).
class LevelSpec {
 public:
  enum class Kind { Absolute, Quantile, Normalized };

  static LevelSpec absolute(double u);
  static LevelSpec quantile(double p);    // p in (0,1)
  static LevelSpec normalized(double tau);  // tau > 0, resolved against n

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return value_; }

 private:
  LevelSpec(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

// Maxima over disjoint blocks of length k-1; the trailing remainder of the
// source series is discarded.
struct CycleSeries {
  std::vector<double> values;
  int k = 2;        // cycle order; block length is k-1
  std::size_t m = 0;  // number of complete blocks, = values.size()

  Series as_series() const { return Series(values); }
};

// Exceedances of a level: how many, where (1-based positions), and the gaps
// between consecutive exceedance positions.
struct ExceedanceSummary {
  double level = 0.0;
  std::size_t count = 0;                          // N
  std::vector<std::size_t> positions;             // strictly increasing, 1-based
  std::vector<std::size_t> interexceedance_times; // length N-1, each >= 1
};

// Order statistic sorted[ceil(n*p)] (1-based). Distribution-free and exactly
// reproducible; monotone in p and invariant under permutations.
double empirical_quantile(const Series& series, double p);

double resolve_level(const Series& series, const LevelSpec& spec);

// Strict exceedances: positions i with X_i > level.
ExceedanceSummary exceedance_summary(const Series& series, double level);

// Number of i in 1..n-1 with X_i <= level < X_{i+1}.
std::size_t upcrossing_count(const Series& series, double level);
std::size_t upcrossing_count(const std::vector<double>& values, double level);

// Z_i = max of the i-th disjoint block of k-1 consecutive observations,
// i = 1..floor(n/(k-1)). Requires k >= 2 and n >= k-1. k = 2 returns the
// series unchanged.
CycleSeries block_cycles(const Series& series, int k);

}  // namespace exidx
