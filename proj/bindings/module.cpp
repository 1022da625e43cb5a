#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "exidx/diagnostics.hpp"
#include "exidx/errors.hpp"
#include "exidx/estimators.hpp"
#include "exidx/harness.hpp"
#include "exidx/mm.hpp"
#include "exidx/rng.hpp"
#include "exidx/series.hpp"
#include "exidx/simulators.hpp"

namespace py = pybind11;
using namespace exidx;

namespace {

LevelSpec make_level(std::optional<double> level, std::optional<double> quantile,
                     std::optional<double> tau) {
  const int given = int(level.has_value()) + int(quantile.has_value()) + int(tau.has_value());
  if (given > 1) throw std::invalid_argument("give only one of level, quantile, tau");
  if (level) return LevelSpec::absolute(*level);
  if (tau) return LevelSpec::normalized(*tau);
  return LevelSpec::quantile(quantile.value_or(0.95));
}

MMSignature make_signature(const py::object& spec) {
  // accepted forms: [alpha, ...] (single row, offsets 0,1,...),
  // [(l, j, alpha), ...], or a "l j alpha" text block / file content
  if (py::isinstance<MMSignature>(spec)) return spec.cast<MMSignature>();
  if (py::isinstance<py::str>(spec)) return MMSignature::parse_text(spec.cast<std::string>());

  auto coefficient = [](const py::handle& value, MMSignature::Entry& e) {
    if (py::isinstance<py::str>(value)) {
      const auto text = value.cast<std::string>();
      const auto slash = text.find('/');
      if (slash == std::string::npos) {
        e.alpha = std::stod(text);
      } else {
        Frac f(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
        e.alpha = f.value();
        e.exact = f;
      }
    } else {
      e.alpha = value.cast<double>();
    }
  };

  std::vector<MMSignature::Entry> entries;
  long offset = 0;
  for (const auto& item : spec.cast<py::sequence>()) {
    MMSignature::Entry e;
    if (py::isinstance<py::tuple>(item) || py::isinstance<py::list>(item)) {
      const auto triple = item.cast<py::sequence>();
      e.row = triple[0].cast<long>();
      e.offset = triple[1].cast<long>();
      coefficient(triple[2], e);
    } else {
      e.row = 1;
      e.offset = offset++;
      coefficient(item, e);
    }
    entries.push_back(e);
  }
  return MMSignature::from_entries(std::move(entries));
}

ModelSpec make_model(const std::string& name, const std::map<std::string, double>& params,
                     long burn_in, std::uint64_t seed, const py::object& signature) {
  ModelSpec spec;
  spec.id = model_from_string(name);
  spec.params = params;
  spec.burn_in = burn_in;
  spec.seed = seed;
  if (!signature.is_none()) spec.signature = make_signature(signature);
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "extremal index estimation via block-maxima cycles";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_ArithmeticError);

  py::class_<CycleSeries>(m, "CycleSeries")
      .def_readonly("values", &CycleSeries::values)
      .def_readonly("k", &CycleSeries::k)
      .def_readonly("m", &CycleSeries::m)
      .def("__len__", [](const CycleSeries& c) { return c.values.size(); });

  py::class_<ExceedanceSummary>(m, "ExceedanceSummary")
      .def_readonly("level", &ExceedanceSummary::level)
      .def_readonly("count", &ExceedanceSummary::count)
      .def_readonly("positions", &ExceedanceSummary::positions)
      .def_readonly("interexceedance_times", &ExceedanceSummary::interexceedance_times);

  py::class_<ThetaEstimate>(m, "ThetaEstimate")
      .def_readonly("value", &ThetaEstimate::value)
      .def_readonly("raw", &ThetaEstimate::raw)
      .def_readonly("level", &ThetaEstimate::level)
      .def_readonly("k", &ThetaEstimate::k)
      .def_readonly("n_exceedances", &ThetaEstimate::n_exceedances)
      .def_property_readonly("estimator",
                             [](const ThetaEstimate& e) { return to_string(e.id); })
      .def("__repr__", [](const ThetaEstimate& e) {
        std::ostringstream out;
        out << "ThetaEstimate(" << to_string(e.id) << ", value=" << e.value << ")";
        return out.str();
      });

  py::class_<KnValue>(m, "KnValue")
      .def_readonly("kn", &KnValue::kn)
      .def_readonly("rn", &KnValue::rn);

  py::class_<MMSignature>(m, "MMSignature")
      .def(py::init([](const py::object& spec) { return make_signature(spec); }))
      .def_static("load", &MMSignature::load)
      .def("serialize", &MMSignature::serialize)
      .def("__repr__", [](const MMSignature& s) {
        return "MMSignature(rows=" + std::to_string(s.rows().size()) + ")";
      });

  py::class_<DkWitness>(m, "DkWitness")
      .def_readonly("row", &DkWitness::row)
      .def_readonly("offset", &DkWitness::offset)
      .def_readonly("lhs", &DkWitness::lhs)
      .def_readonly("rhs", &DkWitness::rhs);

  py::class_<DkCheckResult>(m, "DkCheckResult")
      .def_readonly("holds", &DkCheckResult::holds)
      .def_readonly("witness", &DkCheckResult::witness)
      .def("__bool__", [](const DkCheckResult& r) { return r.holds; });

  // --- core ------------------------------------------------------------------
  m.def(
      "empirical_quantile",
      [](const std::vector<double>& x, double p) { return empirical_quantile(Series(x), p); },
      py::arg("series"), py::arg("p"));
  m.def(
      "resolve_level",
      [](const std::vector<double>& x, std::optional<double> level,
         std::optional<double> quantile, std::optional<double> tau) {
        return resolve_level(Series(x), make_level(level, quantile, tau));
      },
      py::arg("series"), py::arg("level") = std::nullopt, py::arg("quantile") = std::nullopt,
      py::arg("tau") = std::nullopt);
  m.def(
      "exceedance_summary",
      [](const std::vector<double>& x, double level) {
        return exceedance_summary(Series(x), level);
      },
      py::arg("series"), py::arg("level"));
  m.def(
      "upcrossing_count",
      [](const std::vector<double>& x, double level) {
        return upcrossing_count(Series(x), level);
      },
      py::arg("series"), py::arg("level"));
  m.def(
      "block_cycles",
      [](const std::vector<double>& x, int k) { return block_cycles(Series(x), k); },
      py::arg("series"), py::arg("k"));

  // --- estimators --------------------------------------------------------------
  m.def(
      "runs_estimator",
      [](const std::vector<double>& x, double level, int run) {
        return runs_estimator(Series(x), level, run);
      },
      py::arg("series"), py::arg("level"), py::arg("run"));
  m.def(
      "upcrossings_estimator",
      [](const std::vector<double>& x, double level) {
        return upcrossings_estimator(Series(x), level);
      },
      py::arg("series"), py::arg("level"));
  m.def(
      "intervals_estimator",
      [](const std::vector<double>& x, double level) {
        return intervals_estimator(Series(x), level);
      },
      py::arg("series"), py::arg("level"));
  m.def(
      "ml_estimator",
      [](const std::vector<double>& x, double level) { return ml_estimator(Series(x), level); },
      py::arg("series"), py::arg("level"));
  m.def("tdc_estimator", &tdc_estimator, py::arg("cycles"),
        py::arg("upper_fraction") = kDefaultTdcUpperFraction);
  m.def("max_moment_theta", &max_moment_theta, py::arg("cycles"));
  m.def(
      "to_unit_frechet",
      [](const std::vector<double>& x) { return to_unit_frechet(Series(x)).values(); },
      py::arg("series"));
  m.def(
      "max_moment_scaled_theta",
      [](const std::vector<double>& x, int k) {
        return max_moment_scaled_theta(Series(x), k);
      },
      py::arg("unit_frechet_series"), py::arg("k"));
  m.def(
      "cycle_direct",
      [](const std::vector<double>& x, int k, std::optional<double> level,
         std::optional<double> quantile, std::optional<double> tau) {
        return cycle_direct(Series(x), k, make_level(level, quantile, tau));
      },
      py::arg("series"), py::arg("k"), py::arg("level") = std::nullopt,
      py::arg("quantile") = std::nullopt, py::arg("tau") = std::nullopt);
  m.def(
      "cycle_indirect",
      [](const std::vector<double>& x, int k, const std::string& base,
         std::optional<double> level, std::optional<double> quantile, std::optional<double> tau) {
        BaseEstimator b;
        if (base == "upcross") {
          b = BaseEstimator::Upcross;
        } else if (base == "intervals") {
          b = BaseEstimator::Intervals;
        } else if (base == "ml") {
          b = BaseEstimator::MaxLik;
        } else if (base == "max-moment") {
          b = BaseEstimator::MaxMoment;
        } else {
          throw std::invalid_argument("base must be upcross, intervals, ml or max-moment");
        }
        return cycle_indirect(Series(x), k, make_level(level, quantile, tau), b);
      },
      py::arg("series"), py::arg("k"), py::arg("base"), py::arg("level") = std::nullopt,
      py::arg("quantile") = std::nullopt, py::arg("tau") = std::nullopt);
  m.def(
      "cycle_tdc",
      [](const std::vector<double>& x, int k, std::optional<double> level,
         std::optional<double> quantile, std::optional<double> tau, double upper_fraction) {
        return cycle_tdc(Series(x), k, make_level(level, quantile, tau), upper_fraction);
      },
      py::arg("series"), py::arg("k"), py::arg("level") = std::nullopt,
      py::arg("quantile") = std::nullopt, py::arg("tau") = std::nullopt,
      py::arg("upper_fraction") = kDefaultTdcUpperFraction);

  // --- diagnostics -----------------------------------------------------------
  m.def("kn_value", &kn_value, py::arg("n"), py::arg("s"));
  m.def(
      "anti_dk_proportion",
      [](const std::vector<double>& x, int k, double tau, double s) {
        return anti_dk_proportion(Series(x), k, tau, s);
      },
      py::arg("series"), py::arg("k"), py::arg("tau"), py::arg("s"));
  m.def(
      "anti_d1_proportion",
      [](const std::vector<double>& x, double tau, double s) {
        return anti_d1_proportion(Series(x), tau, s);
      },
      py::arg("series"), py::arg("tau"), py::arg("s"));
  m.def(
      "dk_count",
      [](const std::vector<double>& x, int k, double tau, double s) {
        return dk_count(Series(x), k, tau, s);
      },
      py::arg("series"), py::arg("k"), py::arg("tau"), py::arg("s"));
  m.def(
      "trajectory",
      [](const std::vector<double>& x, int k, double tau, double s,
         std::optional<std::vector<std::size_t>> grid, const std::string& stat) {
        const Series series(x);
        const auto stat_id =
            stat == "d" ? DiagnosticStat::RunCount : DiagnosticStat::Proportion;
        const auto grid_values =
            grid ? *grid : default_grid(series.size(), k, tau, s);
        const auto points = trajectory(series, k, tau, s, grid_values, stat_id);
        py::list out;
        for (const auto& p : points) {
          py::dict row;
          row["m"] = p.m;
          row["k"] = p.k;
          row["tau"] = p.tau;
          row["s"] = p.s;
          row["r"] = p.r;
          row["statistic"] = to_string(p.stat);
          row["value"] = p.value ? py::cast(*p.value) : py::none();
          out.append(row);
        }
        return out;
      },
      py::arg("series"), py::arg("k"), py::arg("tau"), py::arg("s"),
      py::arg("grid") = std::nullopt, py::arg("stat") = "p");
  m.def(
      "k_selection_report",
      [](const std::vector<double>& x, int k_max, double tau, double s, double gap_threshold) {
        const auto report = k_selection_report(Series(x), k_max, tau, s, gap_threshold);
        py::dict out;
        out["recommended_k"] = report.recommended_k;
        out["gap_below_threshold"] = report.gap_below_threshold;
        out["threshold"] = report.threshold;
        out["note"] = report.note;
        py::list rows;
        for (const auto& row : report.rows) {
          py::dict r;
          r["k"] = row.k;
          r["d"] = row.d;
          r["p"] = row.p ? py::cast(*row.p) : py::none();
          r["gap_from_previous"] =
              row.gap_from_previous ? py::cast(*row.gap_from_previous) : py::none();
          rows.append(r);
        }
        out["rows"] = rows;
        return out;
      },
      py::arg("series"), py::arg("k_max"), py::arg("tau"), py::arg("s"),
      py::arg("gap_threshold") = 0.05);

  // --- moving maxima ------------------------------------------------------------
  m.def(
      "mm_check_dk",
      [](const py::object& sig, int k) { return mm_check_dk(make_signature(sig), k); },
      py::arg("signature"), py::arg("k"));
  m.def(
      "mm_min_k",
      [](const py::object& sig, int k_max) { return mm_min_k(make_signature(sig), k_max); },
      py::arg("signature"), py::arg("k_max") = 10);
  m.def(
      "mm_extremal_index",
      [](const py::object& sig) { return mm_extremal_index(make_signature(sig)); },
      py::arg("signature"));
  m.def(
      "mm_simulate",
      [](const py::object& sig, std::size_t n, std::uint64_t seed) {
        return mm_simulate(make_signature(sig), n, seed).values();
      },
      py::arg("signature"), py::arg("n"), py::arg("seed") = 1);

  // --- simulators ------------------------------------------------------------------
  m.def(
      "simulate",
      [](const std::string& model, std::size_t n, const std::map<std::string, double>& params,
         long burn_in, std::uint64_t seed, const py::object& signature) {
        return simulate(make_model(model, params, burn_in, seed, signature), n).values();
      },
      py::arg("model"), py::arg("n"), py::arg("params") = std::map<std::string, double>{},
      py::arg("burn_in") = 1000, py::arg("seed") = 1, py::arg("signature") = py::none());
  m.def(
      "reference_theta",
      [](const std::string& model, const std::map<std::string, double>& params,
         const py::object& signature) -> py::object {
        const auto ref = reference_theta(make_model(model, params, 1000, 1, signature));
        if (!ref) return py::none();
        py::dict out;
        out["theta"] = ref->theta;
        out["source"] = ref->source;
        return out;
      },
      py::arg("model"), py::arg("params") = std::map<std::string, double>{},
      py::arg("signature") = py::none());

  // --- harness -------------------------------------------------------------------
  m.def(
      "run_study",
      [](const std::string& config_json, int threads, const std::string& format) {
        const StudyConfig config = study_config_from_json(config_json);
        return emit_study(run_study(config, threads), emit_format_from_string(format));
      },
      py::arg("config_json"), py::arg("threads") = 1, py::arg("format") = "csv");
  m.def(
      "ingest_prices",
      [](const std::string& path) { return ingest_prices_file(path).values(); },
      py::arg("path"));
  m.def(
      "ingest_prices_text",
      [](const std::string& text) {
        std::istringstream in(text);
        return ingest_prices(in).values();
      },
      py::arg("text"));
  m.def(
      "application_report",
      [](const std::vector<double>& x, int k, double quantile, int runs_r,
         double upper_fraction) {
        const auto rows = application_report(Series(x), k, quantile, runs_r, upper_fraction);
        py::list out;
        for (const auto& row : rows) {
          py::dict r;
          r["estimator"] = to_string(row.id);
          r["estimate"] = row.estimate ? py::cast(*row.estimate) : py::none();
          r["error"] = row.error;
          out.append(r);
        }
        return out;
      },
      py::arg("series"), py::arg("k"), py::arg("quantile") = 0.95, py::arg("runs_r") = 0,
      py::arg("upper_fraction") = kDefaultTdcUpperFraction);

  m.attr("__version__") = "0.1.0";
}
