// Command line front end: simulate the study models, compute extremal index
// estimates, emit local-dependence diagnostics, check moving-maxima
// signatures, run Monte-Carlo studies, and ingest price files.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "exidx/errors.hpp"
#include "exidx/harness.hpp"

using namespace exidx;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_path;
  std::string format = "table";
};

void deliver(const GlobalOptions& global, const std::string& content) {
  if (global.out_path.empty()) {
    std::cout << content;
  } else {
    write_file(global.out_path, content);
  }
}

MMSignature signature_from_options(const std::string& file, const std::string& alphas) {
  if (!file.empty()) return MMSignature::load(file);
  if (alphas.empty()) throw ConfigError("mm model needs --signature FILE or --alphas LIST");
  std::vector<MMSignature::Entry> entries;
  long offset = 0;
  std::string token;
  std::istringstream stream(alphas);
  while (std::getline(stream, token, ',')) {
    MMSignature::Entry e;
    e.row = 1;
    e.offset = offset++;
    const auto slash = token.find('/');
    if (slash == std::string::npos) {
      e.alpha = std::stod(token);
    } else {
      Frac f(std::stoll(token.substr(0, slash)), std::stoll(token.substr(slash + 1)));
      e.alpha = f.value();
      e.exact = f;
    }
    entries.push_back(e);
  }
  return MMSignature::from_entries(std::move(entries));
}

LevelSpec level_from_options(double quantile, double tau, double level, bool has_level) {
  if (has_level) return LevelSpec::absolute(level);
  if (tau > 0.0) return LevelSpec::normalized(tau);
  return LevelSpec::quantile(quantile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extremal index estimation via block-maxima cycles"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "override the RNG master seed")->group("global");
  app.add_option("--config", global.config_path, "JSON config file (study)")->group("global");
  app.add_option("--out", global.out_path, "write output to this path instead of stdout")
      ->group("global");
  app.add_option("--format", global.format, "output format: table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->group("global");

  // simulate ----------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "simulate one of the study models");
  sim->fallthrough();
  std::string sim_model = "mar";
  std::size_t sim_n = 1000;
  long sim_burn_in = 1000;
  std::uint64_t sim_seed = 1;
  std::vector<std::string> sim_params;
  std::string sim_signature, sim_alphas;
  sim->add_option("--model", sim_model,
                  "ar-cauchy | ar-unif | mar | markov-logistic | garch11 | mm")
      ->required();
  sim->add_option("--n", sim_n, "series length")->required();
  sim->add_option("--burn-in", sim_burn_in, "burn-in length (default 1000)");
  sim->add_option("--model-seed", sim_seed, "simulation seed (default 1)");
  sim->add_option("--param", sim_params, "model parameter name=value (repeatable)");
  sim->add_option("--signature", sim_signature, "signature file for the mm model");
  sim->add_option("--alphas", sim_alphas, "single-row signature, e.g. 2/6,1/6,3/6");

  // estimate ----------------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "compute one extremal index estimate");
  est->fallthrough();
  std::string est_in, est_name = "cycle-direct";
  int est_k = 3, est_run = 0;
  double est_quantile = 0.95, est_tau = 0.0, est_level = 0.0, est_uf = kDefaultTdcUpperFraction;
  bool est_has_level = false;
  est->add_option("--in", est_in, "series file, one value per row")->required();
  est->add_option("--estimator", est_name,
                  "runs | intervals | upcross | ml | max-moment | max-moment-scaled | "
                  "cycle-direct | cycle-upcross | cycle-intervals | cycle-ml | "
                  "cycle-max-moment | cycle-tdc")
      ->required();
  est->add_option("--k", est_k, "cycle order (default 3)");
  est->add_option("--quantile", est_quantile, "level as empirical quantile (default 0.95)");
  est->add_option("--tau", est_tau, "level as normalized tau (overrides --quantile)");
  est->add_option("--level", est_level, "absolute level (overrides quantile and tau)")
      ->each([&](const std::string&) { est_has_level = true; });
  est->add_option("--run", est_run, "run length for the runs estimator (default k)");
  est->add_option("--upper-fraction", est_uf, "tail fraction for cycle-tdc (default 0.05)");

  // cycles --------------------------------------------------------------------
  auto* cyc = app.add_subcommand("cycles", "emit the block-maxima cycle series");
  cyc->fallthrough();
  std::string cyc_in;
  int cyc_k = 3;
  cyc->add_option("--in", cyc_in, "series file")->required();
  cyc->add_option("--k", cyc_k, "cycle order")->required();

  // diagnose ------------------------------------------------------------------
  auto* diag = app.add_subcommand("diagnose", "local dependence diagnostics");
  diag->fallthrough();
  std::string diag_in, diag_stat = "p", diag_grid;
  int diag_k = 3, diag_points = 20, diag_kmax = 6;
  double diag_tau = 50.0, diag_s = 3.0, diag_threshold = 0.05;
  bool diag_select = false;
  std::size_t diag_min_m = 500;
  diag->add_option("--in", diag_in, "series file")->required();
  diag->add_option("--k", diag_k, "dependence order for trajectories (default 3)");
  diag->add_option("--tau", diag_tau, "normalized level parameter (default 50)");
  diag->add_option("--s", diag_s, "exponent in k_n = floor((log n)^s) (default 3)");
  diag->add_option("--stat", diag_stat, "p (anti-D(k) proportion) or d (run count)")
      ->check(CLI::IsMember({"p", "d"}));
  diag->add_option("--grid", diag_grid, "comma separated prefix lengths (default: log spaced)");
  diag->add_option("--points", diag_points, "number of default grid points (default 20)");
  diag->add_option("--min-m", diag_min_m, "smallest default grid prefix (default 500)");
  diag->add_flag("--select", diag_select, "emit the k selection report instead of a trajectory");
  diag->add_option("--k-max", diag_kmax, "largest k for --select (default 6)");
  diag->add_option("--gap-threshold", diag_threshold, "gap threshold for --select (default 0.05)");

  // mm-check ------------------------------------------------------------------
  auto* mmc = app.add_subcommand("mm-check", "signature dependence analysis");
  mmc->fallthrough();
  std::string mmc_signature, mmc_alphas;
  int mmc_k = 0, mmc_kmax = 10;
  mmc->add_option("--signature", mmc_signature, "signature file (lines 'l j alpha')");
  mmc->add_option("--alphas", mmc_alphas, "single-row signature, e.g. 2/6,1/6,3/6");
  mmc->add_option("--k", mmc_k, "check one dependence order (default: scan for the smallest)");
  mmc->add_option("--k-max", mmc_kmax, "scan bound (default 10)");

  // study -----------------------------------------------------------------------
  auto* study = app.add_subcommand("study", "Monte-Carlo study from a JSON config");
  study->fallthrough();
  int study_threads = 1;
  study->add_option("--threads", study_threads, "worker threads (default 1)");

  // ingest ------------------------------------------------------------------------
  auto* ing = app.add_subcommand("ingest", "prices to log-returns, equal neighbors dropped");
  ing->fallthrough();
  std::string ing_in;
  ing->add_option("--in", ing_in, "price file, one price per row")->required();

  // report ---------------------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "full estimator table for one series");
  rep->fallthrough();
  std::string rep_in;
  int rep_k = 5, rep_run = 0;
  double rep_quantile = 0.95, rep_uf = kDefaultTdcUpperFraction;
  rep->add_option("--in", rep_in, "series file (e.g. ingested log-returns)")->required();
  rep->add_option("--k", rep_k, "cycle order (default 5)");
  rep->add_option("--quantile", rep_quantile, "level quantile (default 0.95)");
  rep->add_option("--run", rep_run, "run for the runs estimator (default k)");
  rep->add_option("--upper-fraction", rep_uf, "tail fraction for cycle-tdc (default 0.05)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const EmitFormat format = emit_format_from_string(global.format);

    if (sim->parsed()) {
      ModelSpec spec;
      spec.id = model_from_string(sim_model);
      spec.burn_in = sim_burn_in;
      spec.seed = global.seed.value_or(sim_seed);
      for (const auto& kv : sim_params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects name=value");
        spec.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      }
      if (spec.id == ModelId::MovingMaxima) {
        spec.signature = signature_from_options(sim_signature, sim_alphas);
      }
      deliver(global, emit_series(simulate(spec, sim_n)));
      return 0;
    }

    if (est->parsed()) {
      const Series x = read_series_file(est_in);
      const LevelSpec spec = level_from_options(est_quantile, est_tau, est_level, est_has_level);
      ThetaEstimate estimate;
      switch (estimator_from_string(est_name)) {
        case EstimatorId::Runs:
          estimate = runs_estimator(x, resolve_level(x, spec), est_run > 0 ? est_run : est_k);
          break;
        case EstimatorId::Intervals:
          estimate = intervals_estimator(x, resolve_level(x, spec));
          break;
        case EstimatorId::Upcross:
          estimate = upcrossings_estimator(x, resolve_level(x, spec));
          break;
        case EstimatorId::MaxLik:
          estimate = ml_estimator(x, resolve_level(x, spec));
          break;
        case EstimatorId::MaxMoment:
          estimate = max_moment_theta(block_cycles(x, 2));
          break;
        case EstimatorId::MaxMomentScaled:
          estimate = max_moment_scaled_theta(to_unit_frechet(x), est_k);
          break;
        case EstimatorId::CycleDirect:
          estimate = cycle_direct(x, est_k, spec);
          break;
        case EstimatorId::CycleUpcross:
          estimate = cycle_indirect(x, est_k, spec, BaseEstimator::Upcross);
          break;
        case EstimatorId::CycleIntervals:
          estimate = cycle_indirect(x, est_k, spec, BaseEstimator::Intervals);
          break;
        case EstimatorId::CycleMaxLik:
          estimate = cycle_indirect(x, est_k, spec, BaseEstimator::MaxLik);
          break;
        case EstimatorId::CycleMaxMoment:
          estimate = cycle_indirect(x, est_k, spec, BaseEstimator::MaxMoment);
          break;
        case EstimatorId::CycleTdc:
          estimate = cycle_tdc(x, est_k, spec, est_uf);
          break;
        case EstimatorId::Tdc:
          throw ConfigError("tdc is not a theta estimator; use cycle-tdc");
      }
      deliver(global, emit_report({ReportRow{estimate.id, estimate, ""}}, format));
      return 0;
    }

    if (cyc->parsed()) {
      const Series x = read_series_file(cyc_in);
      deliver(global, emit_series(block_cycles(x, cyc_k).as_series()));
      return 0;
    }

    if (diag->parsed()) {
      const Series x = read_series_file(diag_in);
      if (diag_select) {
        deliver(global, emit_k_selection(
                            k_selection_report(x, diag_kmax, diag_tau, diag_s, diag_threshold),
                            format));
        return 0;
      }
      std::vector<std::size_t> grid;
      if (diag_grid.empty()) {
        grid = default_grid(x.size(), diag_k, diag_tau, diag_s, diag_min_m, diag_points);
      } else {
        std::istringstream stream(diag_grid);
        std::string token;
        while (std::getline(stream, token, ',')) grid.push_back(std::stoul(token));
      }
      const auto stat =
          diag_stat == "p" ? DiagnosticStat::Proportion : DiagnosticStat::RunCount;
      deliver(global, emit_trajectory(trajectory(x, diag_k, diag_tau, diag_s, grid, stat)));
      return 0;
    }

    if (mmc->parsed()) {
      const MMSignature sig = signature_from_options(mmc_signature, mmc_alphas);
      std::ostringstream out;
      if (mmc_k > 0) {
        const auto result = mm_check_dk(sig, mmc_k);
        out << "order k=" << mmc_k << ": " << (result.holds ? "holds" : "fails");
        if (result.witness) {
          out << " (witness l=" << result.witness->row << " j=" << result.witness->offset
              << " lhs=" << result.witness->lhs << " rhs=" << result.witness->rhs << ")";
        }
        out << "\n";
      } else {
        const auto min_k = mm_min_k(sig, mmc_kmax);
        if (min_k) {
          out << "smallest dependence order k = " << *min_k << "\n";
        } else {
          out << "no dependence order up to k_max = " << mmc_kmax << "\n";
        }
      }
      out << "extremal index = " << mm_extremal_index(sig) << "\n";
      deliver(global, out.str());
      return 0;
    }

    if (study->parsed()) {
      if (global.config_path.empty()) throw ConfigError("study requires --config FILE");
      StudyConfig config = load_study_config(global.config_path);
      if (global.seed) config.master_seed = *global.seed;
      deliver(global, emit_study(run_study(config, study_threads), format));
      return 0;
    }

    if (ing->parsed()) {
      deliver(global, emit_series(ingest_prices_file(ing_in)));
      return 0;
    }

    if (rep->parsed()) {
      const Series x = read_series_file(rep_in);
      deliver(global, emit_report(application_report(x, rep_k, rep_quantile, rep_run, rep_uf),
                                  format));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DegeneracyError& e) {
    std::cerr << "degenerate statistic: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
