#pragma once

#include <optional>
#include <string>

#include "exidx/series.hpp"

namespace exidx {

enum class EstimatorId {
  Runs,
  Intervals,
  Upcross,
  MaxLik,
  Tdc,
  MaxMoment,
  MaxMomentScaled,
  CycleDirect,
  CycleUpcross,
  CycleIntervals,
  CycleMaxLik,
  CycleMaxMoment,
  CycleTdc,
};

std::string to_string(EstimatorId id);
EstimatorId estimator_from_string(const std::string& name);

// Base estimator applied to the cycle series inside cycle_indirect.
enum class BaseEstimator { Upcross, Intervals, MaxLik, MaxMoment };

struct ThetaEstimate {
  double value = 0.0;  // clipped to [0,1]
  double raw = 0.0;    // pre-clipping value, kept for diagnostics
  EstimatorId id = EstimatorId::Runs;
  std::optional<int> k;  // cycle order; present only for cycle-based estimators
  double level = 0.0;    // resolved threshold; NaN for purely rank-based estimators
  std::size_t n_exceedances = 0;
};

// Fraction of exceedances followed by run-1 non-exceedances. Windows running
// past the end of the series count as satisfied (missing values act as -inf).
ThetaEstimate runs_estimator(const Series& series, double level, int run);

// Upcrossings over exceedances.
ThetaEstimate upcrossings_estimator(const Series& series, double level);

// Ferro-Segers moment estimator from interexceedance times T_i:
// 2 (sum T)^2 / ((N-1) sum T^2) when max T <= 2, else the (T-1)(T-2) variant.
ThetaEstimate intervals_estimator(const Series& series, double level);

// Sueveges maximum-likelihood estimator from scaled gaps q(T_i - 1).
ThetaEstimate ml_estimator(const Series& series, double level);

// Rank-based upper tail dependence coefficient of consecutive cycle pairs
// (Z_i, Z_{i+1}), evaluated at the top ceil(upper_fraction*(m-1)) ranks.
double tdc_estimator(const CycleSeries& cycles, double upper_fraction);

// Moment estimator 1/(1 - E[F(Z_i v Z_{i+1})]) - 2 with the empirical df
// scaled by m+1.
ThetaEstimate max_moment_theta(const CycleSeries& cycles);

// Rank transform to exact unit Frechet values -1/log(rank/(n+1)); ties are
// broken by first occurrence.
Series to_unit_frechet(const Series& series);

// Scaled variant for unit-Frechet input: max_moment on k-cycles times
// -log Fhat_Z(1) / (k-1). The caller applies to_unit_frechet first.
ThetaEstimate max_moment_scaled_theta(const Series& unit_frechet_series, int k);

// Upcrossings of the cycle series over exceedances of the source series.
ThetaEstimate cycle_direct(const Series& series, int k, const LevelSpec& spec);

// Base estimate on the cycle series times N^Z / N^X at the same level. With
// the upcrossings base the cycle counts cancel and this equals cycle_direct
// exactly, so that case is computed in the collapsed form.
ThetaEstimate cycle_indirect(const Series& series, int k, const LevelSpec& spec,
                             BaseEstimator base);

// (1 - tdc) times N^Z / N^X.
ThetaEstimate cycle_tdc(const Series& series, int k, const LevelSpec& spec,
                        double upper_fraction);

constexpr double kDefaultTdcUpperFraction = 0.05;

}  // namespace exidx
