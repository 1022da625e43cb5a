#include "exidx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "exidx/errors.hpp"
#include "exidx/rng.hpp"

namespace exidx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_full(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_short(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// Whitespace-trimmed strict double parse; empty optional when not a number.
std::optional<double> parse_double(const std::string& token) {
  std::size_t begin = token.find_first_not_of(" \t");
  if (begin == std::string::npos) return std::nullopt;
  std::size_t end = token.find_last_not_of(" \t");
  const std::string body = token.substr(begin, end - begin + 1);
  try {
    std::size_t used = 0;
    const double v = std::stod(body, &used);
    if (used != body.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<std::string> aligned_rows(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::vector<std::string> out;
  for (const auto& row : cells) {
    std::string line = "|";
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += ' ' + row[c] + std::string(width[c] - row[c].size(), ' ') + " |";
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace

// --- config JSON -----------------------------------------------------------

namespace {

using nlohmann::json;

MMSignature signature_from_json(const json& j) {
  std::vector<MMSignature::Entry> entries;
  for (const auto& item : j) {
    MMSignature::Entry e;
    e.row = item.value("l", 1L);
    e.offset = item.at("j").get<long>();
    const auto& alpha = item.at("alpha");
    if (alpha.is_string()) {
      const std::string text = alpha.get<std::string>();
      const auto slash = text.find('/');
      if (slash == std::string::npos) {
        e.alpha = std::stod(text);
      } else {
        Frac f(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        e.alpha = f.value();
        e.exact = f;
      }
    } else {
      e.alpha = alpha.get<double>();
    }
    entries.push_back(e);
  }
  return MMSignature::from_entries(std::move(entries));
}

json signature_to_json(const MMSignature& sig) {
  json out = json::array();
  for (const auto& row : sig.rows()) {
    for (long j = row.min_offset; j <= row.max_offset; ++j) {
      const auto idx = static_cast<std::size_t>(j - row.min_offset);
      if (row.alpha[idx] == 0.0) continue;
      json item;
      item["l"] = row.label;
      item["j"] = j;
      if (row.exact[idx]) {
        item["alpha"] =
            std::to_string(row.exact[idx]->num) + "/" + std::to_string(row.exact[idx]->den);
      } else {
        item["alpha"] = row.alpha[idx];
      }
      out.push_back(item);
    }
  }
  return out;
}

ModelSpec model_from_json(const json& j) {
  ModelSpec spec;
  spec.id = model_from_string(j.at("id").get<std::string>());
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) {
      spec.params[key] = value.get<double>();
    }
  }
  spec.burn_in = j.value("burn_in", 1000L);
  spec.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("signature")) spec.signature = signature_from_json(j.at("signature"));
  if (spec.id == ModelId::MovingMaxima && !spec.signature) {
    throw ConfigError("mm model requires a signature");
  }
  return spec;
}

json model_to_json(const ModelSpec& spec) {
  json out;
  out["id"] = to_string(spec.id);
  out["params"] = json::object();
  for (const auto& [key, value] : spec.params) out["params"][key] = value;
  out["burn_in"] = spec.burn_in;
  out["seed"] = spec.seed;
  if (spec.signature) out["signature"] = signature_to_json(*spec.signature);
  return out;
}

void validate_config(const StudyConfig& config) {
  if (config.replicates < 1) throw ConfigError("study requires replicates >= 1");
  if (config.k < 2) throw ConfigError("study requires k >= 2");
  if (config.n < 2) throw ConfigError("study requires n >= 2");
  if (config.quantiles.empty()) throw ConfigError("study requires at least one quantile");
  for (double q : config.quantiles) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("study quantiles must lie in (0,1)");
  }
  if (config.estimators.empty()) throw ConfigError("study requires at least one estimator");
  for (EstimatorId id : config.estimators) {
    if (id == EstimatorId::Tdc) {
      throw ConfigError("tdc is a dependence coefficient, not a theta estimator; use cycle-tdc");
    }
  }
  if (config.runs_r < 0) throw ConfigError("runs_r must be nonnegative");
  if (!(config.tdc_upper_fraction > 0.0 && config.tdc_upper_fraction < 1.0)) {
    throw ConfigError("tdc_upper_fraction must lie in (0,1)");
  }
}

}  // namespace

StudyConfig study_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot parse study config: ") + e.what());
  }
  try {
    StudyConfig config;
    config.model = model_from_json(j.at("model"));
    config.n = j.value("n", std::size_t{1000});
    config.replicates = j.value("replicates", 1000);
    config.k = j.value("k", 3);
    if (j.contains("quantiles")) config.quantiles = j.at("quantiles").get<std::vector<double>>();
    config.estimators.clear();
    for (const auto& name : j.at("estimators")) {
      config.estimators.push_back(estimator_from_string(name.get<std::string>()));
    }
    config.runs_r = j.value("runs_r", 0);
    config.master_seed = j.value("master_seed", std::uint64_t{1});
    config.tdc_upper_fraction = j.value("tdc_upper_fraction", kDefaultTdcUpperFraction);
    validate_config(config);
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad study config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad study config: ") + e.what());
  }
}

std::string study_config_to_json(const StudyConfig& config) {
  json j;
  j["model"] = model_to_json(config.model);
  j["n"] = config.n;
  j["replicates"] = config.replicates;
  j["k"] = config.k;
  j["quantiles"] = config.quantiles;
  j["estimators"] = json::array();
  for (EstimatorId id : config.estimators) j["estimators"].push_back(to_string(id));
  j["runs_r"] = config.runs_r;
  j["master_seed"] = config.master_seed;
  j["tdc_upper_fraction"] = config.tdc_upper_fraction;
  return j.dump(2) + "\n";
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open study config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return study_config_from_json(buffer.str());
}

// --- estimator dispatch ----------------------------------------------------

namespace {

ThetaEstimate evaluate_estimator(EstimatorId id, const Series& x, const Series* unit_frechet,
                                 int k, const LevelSpec& spec, int runs_r,
                                 double upper_fraction) {
  switch (id) {
    case EstimatorId::Runs:
      return runs_estimator(x, resolve_level(x, spec), runs_r > 0 ? runs_r : k);
    case EstimatorId::Intervals:
      return intervals_estimator(x, resolve_level(x, spec));
    case EstimatorId::Upcross:
      return upcrossings_estimator(x, resolve_level(x, spec));
    case EstimatorId::MaxLik:
      return ml_estimator(x, resolve_level(x, spec));
    case EstimatorId::MaxMoment:
      // consecutive-pair moment estimator evaluated on the series itself
      return max_moment_theta(block_cycles(x, 2));
    case EstimatorId::MaxMomentScaled: {
      if (unit_frechet) return max_moment_scaled_theta(*unit_frechet, k);
      return max_moment_scaled_theta(to_unit_frechet(x), k);
    }
    case EstimatorId::CycleDirect:
      return cycle_direct(x, k, spec);
    case EstimatorId::CycleUpcross:
      return cycle_indirect(x, k, spec, BaseEstimator::Upcross);
    case EstimatorId::CycleIntervals:
      return cycle_indirect(x, k, spec, BaseEstimator::Intervals);
    case EstimatorId::CycleMaxLik:
      return cycle_indirect(x, k, spec, BaseEstimator::MaxLik);
    case EstimatorId::CycleMaxMoment:
      return cycle_indirect(x, k, spec, BaseEstimator::MaxMoment);
    case EstimatorId::CycleTdc:
      return cycle_tdc(x, k, spec, upper_fraction);
    case EstimatorId::Tdc:
      throw ConfigError("tdc is a dependence coefficient, not a theta estimator");
  }
  throw std::invalid_argument("unknown estimator id");
}

}  // namespace

StudyResult run_study(const StudyConfig& config, int threads) {
  validate_config(config);
  const auto ref = reference_theta(config.model);
  if (!ref) {
    throw ConfigError("no reference theta recorded for this model and parameter set");
  }

  const auto n_rep = static_cast<std::size_t>(config.replicates);
  const std::size_t n_est = config.estimators.size();
  const std::size_t n_q = config.quantiles.size();
  const bool needs_frechet =
      std::find(config.estimators.begin(), config.estimators.end(),
                EstimatorId::MaxMomentScaled) != config.estimators.end();

  std::vector<double> values(n_rep * n_est * n_q, kNaN);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n_rep) break;
      try {
        ModelSpec model = config.model;
        model.seed = derive_seed(config.master_seed, r);
        const Series x = simulate(model, config.n);
        std::optional<Series> frechet;
        if (needs_frechet) frechet = to_unit_frechet(x);
        for (std::size_t qi = 0; qi < n_q; ++qi) {
          const double level = empirical_quantile(x, config.quantiles[qi]);
          const LevelSpec spec = LevelSpec::absolute(level);
          for (std::size_t ei = 0; ei < n_est; ++ei) {
            try {
              const ThetaEstimate est =
                  evaluate_estimator(config.estimators[ei], x, frechet ? &*frechet : nullptr,
                                     config.k, spec, config.runs_r, config.tdc_upper_fraction);
              values[(r * n_est + ei) * n_q + qi] = est.value;
            } catch (const DegeneracyError&) {
              // cell failure; stays NaN and is counted below
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(threads, config.replicates));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  StudyResult result;
  result.config = config;
  result.reference_theta = ref->theta;
  result.reference_source = ref->source;
  result.cells.assign(n_est, std::vector<StudyCell>(n_q));
  for (std::size_t ei = 0; ei < n_est; ++ei) {
    for (std::size_t qi = 0; qi < n_q; ++qi) {
      double err_sum = 0.0, err_sq_sum = 0.0, value_sum = 0.0;
      std::size_t successes = 0;
      for (std::size_t r = 0; r < n_rep; ++r) {
        const double v = values[(r * n_est + ei) * n_q + qi];
        if (std::isnan(v)) continue;
        ++successes;
        const double err = v - ref->theta;
        err_sum += err;
        err_sq_sum += err * err;
        value_sum += v;
      }
      StudyCell cell;
      cell.failures = static_cast<int>(n_rep - successes);
      if (successes > 0) {
        cell.rmse = std::sqrt(err_sq_sum / static_cast<double>(successes));
        cell.abias = std::abs(err_sum / static_cast<double>(successes));
        cell.mean = value_sum / static_cast<double>(successes);
        if (cell.rmse < cell.abias - 1e-12) {
          throw std::logic_error("rmse fell below abias; aggregation is broken");
        }
      } else {
        cell.rmse = cell.abias = cell.mean = kNaN;
      }
      result.cells[ei][qi] = cell;
    }
  }
  return result;
}

// --- ingestion --------------------------------------------------------------

namespace {

std::vector<std::pair<std::size_t, double>> read_numeric_rows(std::istream& in,
                                                              const char* what) {
  std::vector<std::pair<std::size_t, double>> rows;
  std::string line;
  std::size_t row_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto value = parse_double(line);
    if (!value) {
      if (first_content) {
        first_content = false;  // single header row allowed
        continue;
      }
      throw DataError(std::string("cannot parse ") + what + " value '" + line + "'", row_no);
    }
    first_content = false;
    rows.emplace_back(row_no, *value);
  }
  return rows;
}

}  // namespace

Series ingest_prices(std::istream& in) {
  const auto rows = read_numeric_rows(in, "price");
  std::vector<double> retained;
  retained.reserve(rows.size());
  for (const auto& [row_no, price] : rows) {
    if (!(price > 0.0)) throw DataError("non-positive price", row_no);
    if (retained.empty() || price != retained.back()) retained.push_back(price);
  }
  if (retained.size() < 2) {
    throw DataError("fewer than two distinct consecutive prices after deduplication");
  }
  std::vector<double> returns;
  returns.reserve(retained.size() - 1);
  for (std::size_t i = 1; i < retained.size(); ++i) {
    returns.push_back(std::log(retained[i] / retained[i - 1]));
  }
  return Series(std::move(returns));
}

Series ingest_prices_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file: " + path);
  return ingest_prices(in);
}

Series read_series(std::istream& in) {
  const auto rows = read_numeric_rows(in, "series");
  if (rows.empty()) throw DataError("series file has no numeric rows");
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& [row_no, v] : rows) values.push_back(v);
  return Series(std::move(values));
}

Series read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file: " + path);
  return read_series(in);
}

// --- application report -----------------------------------------------------

std::vector<ReportRow> application_report(const Series& series, int k, double quantile,
                                          int runs_r, double upper_fraction) {
  const LevelSpec spec = LevelSpec::quantile(quantile);
  const Series frechet = to_unit_frechet(series);
  const std::vector<EstimatorId> order = {
      EstimatorId::Runs,          EstimatorId::Intervals,     EstimatorId::CycleDirect,
      EstimatorId::CycleUpcross,  EstimatorId::CycleIntervals, EstimatorId::CycleMaxLik,
      EstimatorId::CycleTdc,      EstimatorId::CycleMaxMoment, EstimatorId::MaxMomentScaled,
  };
  std::vector<ReportRow> rows;
  rows.reserve(order.size());
  for (EstimatorId id : order) {
    ReportRow row{id, std::nullopt, ""};
    try {
      row.estimate = evaluate_estimator(id, series, &frechet, k, spec, runs_r, upper_fraction);
    } catch (const DegeneracyError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- emission ----------------------------------------------------------------

EmitFormat emit_format_from_string(const std::string& name) {
  if (name == "csv") return EmitFormat::DelimitedText;
  if (name == "table") return EmitFormat::AlignedTable;
  throw ConfigError("unknown format '" + name + "' (expected csv or table)");
}

std::string emit_study(const StudyResult& result, EmitFormat format) {
  const auto& config = result.config;
  if (format == EmitFormat::DelimitedText) {
    std::string out =
        "model,n,replicates,k,master_seed,reference_theta,reference_source,"
        "estimator,quantile,rmse,abias,mean,failures\n";
    for (std::size_t ei = 0; ei < config.estimators.size(); ++ei) {
      for (std::size_t qi = 0; qi < config.quantiles.size(); ++qi) {
        const auto& cell = result.cells[ei][qi];
        out += to_string(config.model.id) + ',' + std::to_string(config.n) + ',' +
               std::to_string(config.replicates) + ',' + std::to_string(config.k) + ',' +
               std::to_string(config.master_seed) + ',' + format_full(result.reference_theta) +
               ',' + result.reference_source + ',' + to_string(config.estimators[ei]) + ',' +
               format_full(config.quantiles[qi]) + ',' + format_full(cell.rmse) + ',' +
               format_full(cell.abias) + ',' + format_full(cell.mean) + ',' +
               std::to_string(cell.failures) + '\n';
      }
    }
    return out;
  }

  std::ostringstream head;
  head << "study: model=" << to_string(config.model.id) << " n=" << config.n
       << " replicates=" << config.replicates << " k=" << config.k
       << " master_seed=" << config.master_seed << "\n"
       << "reference theta = " << format_short(result.reference_theta) << " ("
       << result.reference_source << ")\n\n";

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"estimator"};
  for (double q : config.quantiles) header.push_back("rmse q" + format_short(q));
  for (double q : config.quantiles) header.push_back("abias q" + format_short(q));
  header.emplace_back("failures");
  cells.push_back(header);
  for (std::size_t ei = 0; ei < config.estimators.size(); ++ei) {
    std::vector<std::string> row = {to_string(config.estimators[ei])};
    int failures = 0;
    for (std::size_t qi = 0; qi < config.quantiles.size(); ++qi) {
      row.push_back(format_short(result.cells[ei][qi].rmse));
      failures = std::max(failures, result.cells[ei][qi].failures);
    }
    for (std::size_t qi = 0; qi < config.quantiles.size(); ++qi) {
      row.push_back(format_short(result.cells[ei][qi].abias));
    }
    row.push_back(std::to_string(failures));
    cells.push_back(row);
  }
  std::string out = head.str();
  for (const auto& line : aligned_rows(cells)) out += line + '\n';
  return out;
}

std::string emit_trajectory(const std::vector<DiagnosticPoint>& points) {
  std::string out = "m,k,tau,s,r,statistic,value\n";
  for (const auto& p : points) {
    out += std::to_string(p.m) + ',' + std::to_string(p.k) + ',' + format_full(p.tau) + ',' +
           format_full(p.s) + ',' + std::to_string(p.r) + ',' + to_string(p.stat) + ',' +
           (p.value ? format_full(*p.value) : "nan") + '\n';
  }
  return out;
}

std::string emit_report(const std::vector<ReportRow>& rows, EmitFormat format) {
  if (format == EmitFormat::DelimitedText) {
    std::string out = "estimator,value,raw,level,k,n_exceedances,error\n";
    for (const auto& row : rows) {
      out += to_string(row.id) + ',';
      if (row.estimate) {
        out += format_full(row.estimate->value) + ',' + format_full(row.estimate->raw) + ',' +
               format_full(row.estimate->level) + ',' +
               (row.estimate->k ? std::to_string(*row.estimate->k) : "") + ',' +
               std::to_string(row.estimate->n_exceedances) + ",\n";
      } else {
        out += "nan,nan,nan,,0," + row.error + '\n';
      }
    }
    return out;
  }

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"estimator", "theta", "raw", "level", "k", "N>u", "note"});
  for (const auto& row : rows) {
    std::vector<std::string> line = {to_string(row.id)};
    if (row.estimate) {
      line.push_back(format_short(row.estimate->value));
      line.push_back(format_short(row.estimate->raw));
      line.push_back(format_short(row.estimate->level));
      line.push_back(row.estimate->k ? std::to_string(*row.estimate->k) : "-");
      line.push_back(std::to_string(row.estimate->n_exceedances));
      line.emplace_back("");
    } else {
      line.insert(line.end(), {"-", "-", "-", "-", "-", row.error});
    }
    cells.push_back(line);
  }
  std::string out;
  for (const auto& line : aligned_rows(cells)) out += line + '\n';
  return out;
}

std::string emit_k_selection(const KSelectionReport& report, EmitFormat format) {
  if (format == EmitFormat::DelimitedText) {
    std::string out = "# " + report.note + "\n";
    out += "k,d,p,gap_from_previous,recommended\n";
    for (const auto& row : report.rows) {
      out += std::to_string(row.k) + ',' + std::to_string(row.d) + ',' +
             (row.p ? format_full(*row.p) : "nan") + ',' +
             (row.gap_from_previous ? format_full(*row.gap_from_previous) : "nan") + ',' +
             (row.k == report.recommended_k ? "1" : "0") + '\n';
    }
    return out;
  }

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"k", "d_k", "p_k", "gap (d_{k-1}-d_k)/d_1"});
  for (const auto& row : report.rows) {
    cells.push_back({std::to_string(row.k), std::to_string(row.d),
                     row.p ? format_short(*row.p) : "-",
                     row.gap_from_previous ? format_short(*row.gap_from_previous) : "-"});
  }
  std::string out;
  for (const auto& line : aligned_rows(cells)) out += line + '\n';
  out += "recommended k = " + std::to_string(report.recommended_k);
  if (!report.gap_below_threshold) {
    out += " (no forward gap fell below " + format_short(report.threshold) + ")";
  }
  out += "\nnote: " + report.note + '\n';
  return out;
}

std::string emit_series(const Series& series) {
  std::string out;
  out.reserve(series.size() * 20);
  for (double v : series) {
    out += format_full(v);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << content;
  if (!out) throw DataError("cannot write output file: " + path);
}

}  // namespace exidx
