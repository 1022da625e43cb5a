#include "exidx/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace exidx {

Series::Series(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("series must contain at least one value");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("series value at position " + std::to_string(i + 1) +
                                  " is not finite");
    }
  }
}

Series Series::prefix(std::size_t m) const {
  if (m == 0 || m > values_.size()) throw std::invalid_argument("prefix length out of range");
  return Series(std::vector<double>(values_.begin(), values_.begin() + static_cast<long>(m)));
}

LevelSpec LevelSpec::absolute(double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("absolute level must be finite");
  return LevelSpec(Kind::Absolute, u);
}

LevelSpec LevelSpec::quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0,1)");
  return LevelSpec(Kind::Quantile, p);
}

LevelSpec LevelSpec::normalized(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("normalized level requires tau > 0");
  return LevelSpec(Kind::Normalized, tau);
}

double empirical_quantile(const Series& series, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0,1)");
  const std::size_t n = series.size();
  // ceil(n*p) with a guard against representation noise in n*p.
  double scaled = static_cast<double>(n) * p;
  auto idx = static_cast<std::size_t>(std::ceil(scaled - 1e-12));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  std::vector<double> sorted = series.values();
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(idx - 1), sorted.end());
  return sorted[idx - 1];
}

double resolve_level(const Series& series, const LevelSpec& spec) {
  switch (spec.kind()) {
    case LevelSpec::Kind::Absolute:
      return spec.parameter();
    case LevelSpec::Kind::Quantile:
      return empirical_quantile(series, spec.parameter());
    case LevelSpec::Kind::Normalized: {
      const double tau = spec.parameter();
      const auto n = static_cast<double>(series.size());
      if (!(tau < n)) throw std::invalid_argument("normalized level requires tau < n");
      return empirical_quantile(series, 1.0 - tau / n);
    }
  }
  throw std::invalid_argument("unknown level kind");
}

ExceedanceSummary exceedance_summary(const Series& series, double level) {
  ExceedanceSummary out;
  out.level = level;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] > level) out.positions.push_back(i + 1);
  }
  out.count = out.positions.size();
  if (out.count >= 2) {
    out.interexceedance_times.reserve(out.count - 1);
    for (std::size_t i = 0; i + 1 < out.count; ++i) {
      out.interexceedance_times.push_back(out.positions[i + 1] - out.positions[i]);
    }
  }
  return out;
}

std::size_t upcrossing_count(const std::vector<double>& values, double level) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] <= level && values[i + 1] > level) ++count;
  }
  return count;
}

std::size_t upcrossing_count(const Series& series, double level) {
  return upcrossing_count(series.values(), level);
}

CycleSeries block_cycles(const Series& series, int k) {
  if (k < 2) throw std::invalid_argument("cycle order k must be at least 2");
  const auto block = static_cast<std::size_t>(k - 1);
  const std::size_t n = series.size();
  if (n < block) throw std::invalid_argument("series shorter than one block of length k-1");

  CycleSeries cycles;
  cycles.k = k;
  cycles.m = n / block;
  cycles.values.reserve(cycles.m);
  for (std::size_t b = 0; b < cycles.m; ++b) {
    double best = series[b * block];
    for (std::size_t s = 1; s < block; ++s) best = std::max(best, series[b * block + s]);
    cycles.values.push_back(best);
  }
  return cycles;
}

}  // namespace exidx
