#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exidx/diagnostics.hpp"
#include "exidx/estimators.hpp"
#include "exidx/simulators.hpp"

namespace exidx {

// Declarative Monte-Carlo experiment: a model, a sample size, replicate
// count, cycle order, quantile grid and estimator list.
struct StudyConfig {
  ModelSpec model;
  std::size_t n = 1000;
  int replicates = 1000;
  int k = 3;
  std::vector<double> quantiles = {0.95, 0.975, 0.99};
  std::vector<EstimatorId> estimators;
  int runs_r = 0;  // run for the direct runs estimator; 0 means "use k"
  std::uint64_t master_seed = 1;
  double tdc_upper_fraction = kDefaultTdcUpperFraction;
};

// JSON round trip for the config file format (documented in the README).
StudyConfig study_config_from_json(const std::string& text);
std::string study_config_to_json(const StudyConfig& config);
StudyConfig load_study_config(const std::string& path);

struct StudyCell {
  double rmse = 0.0;
  double abias = 0.0;
  double mean = 0.0;
  int failures = 0;  // replicates where the estimator raised a degeneracy error
};

struct StudyResult {
  StudyConfig config;
  double reference_theta = 0.0;
  std::string reference_source;
  // cells[e][q] follows config.estimators x config.quantiles.
  std::vector<std::vector<StudyCell>> cells;
};

// Runs the study: replicate r simulates with stream derive(master_seed, r),
// evaluates every estimator at every quantile, and aggregates rmse, abias and
// the failure count per cell. The result is identical for any thread count.
StudyResult run_study(const StudyConfig& config, int threads = 1);

// One price per row (optional single header row). Successive equal prices are
// dropped, then log-returns of the retained prices are returned.
Series ingest_prices(std::istream& in);
Series ingest_prices_file(const std::string& path);

// Plain series reader for estimate/diagnose inputs: one value per row,
// optional single header row.
Series read_series(std::istream& in);
Series read_series_file(const std::string& path);

struct ReportRow {
  EstimatorId id;
  std::optional<ThetaEstimate> estimate;  // empty when the estimator degenerated
  std::string error;
};

// Direct runs/intervals estimators on the series plus the full cycle-based
// family at the given k and quantile; estimators that cannot be formed yield
// rows with an error note instead of failing the report.
std::vector<ReportRow> application_report(const Series& series, int k, double quantile,
                                          int runs_r = 0,
                                          double upper_fraction = kDefaultTdcUpperFraction);

enum class EmitFormat { DelimitedText, AlignedTable };

EmitFormat emit_format_from_string(const std::string& name);

// Emission. Delimited text is comma separated, LF line endings, full
// precision; aligned tables round to 4 significant digits.
std::string emit_study(const StudyResult& result, EmitFormat format);
std::string emit_trajectory(const std::vector<DiagnosticPoint>& points);
std::string emit_report(const std::vector<ReportRow>& rows, EmitFormat format);
std::string emit_k_selection(const KSelectionReport& report, EmitFormat format);
std::string emit_series(const Series& series);

void write_file(const std::string& path, const std::string& content);

}  // namespace exidx
