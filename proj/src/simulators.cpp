#include "exidx/simulators.hpp"

#include <cmath>
#include <stdexcept>

#include "exidx/errors.hpp"
#include "exidx/rng.hpp"

namespace exidx {

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::ArCauchy: return "ar-cauchy";
    case ModelId::ArUnif: return "ar-unif";
    case ModelId::Mar: return "mar";
    case ModelId::MarkovLogistic: return "markov-logistic";
    case ModelId::Garch11: return "garch11";
    case ModelId::MovingMaxima: return "mm";
  }
  throw std::invalid_argument("unknown model id");
}

ModelId model_from_string(const std::string& name) {
  if (name == "ar-cauchy") return ModelId::ArCauchy;
  if (name == "ar-unif") return ModelId::ArUnif;
  if (name == "mar") return ModelId::Mar;
  if (name == "markov-logistic") return ModelId::MarkovLogistic;
  if (name == "garch11") return ModelId::Garch11;
  if (name == "mm") return ModelId::MovingMaxima;
  throw ConfigError("unknown model name: " + name);
}

double ModelSpec::param(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

namespace {

Series simulate_ar_cauchy(const ModelSpec& spec, std::size_t n) {
  const double rho = spec.param("rho", -0.6);
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("ar-cauchy requires |rho| < 1");
  Rng rng(spec.seed, 0);
  // Stationary start: Cauchy scale sums to 1/(1-|rho|).
  double x = rng.cauchy() / (1.0 - std::abs(rho));
  std::vector<double> out;
  out.reserve(n);
  for (long t = 0; t < spec.burn_in + static_cast<long>(n); ++t) {
    x = rho * x + rng.cauchy();
    if (t >= spec.burn_in) out.push_back(x);
  }
  return Series(std::move(out));
}

Series simulate_ar_unif(const ModelSpec& spec, std::size_t n) {
  const double r_param = spec.param("r", 2.0);
  const auto r = static_cast<long>(r_param);
  if (r < 2 || static_cast<double>(r) != r_param) {
    throw std::invalid_argument("ar-unif requires integer r >= 2");
  }
  Rng rng(spec.seed, 0);
  double x = rng.uniform();  // exact stationary start
  std::vector<double> out;
  out.reserve(n);
  const auto rd = static_cast<double>(r);
  for (long t = 0; t < spec.burn_in + static_cast<long>(n); ++t) {
    // eps uniform on {1/r, 2/r, ..., 1}
    const double eps = (std::floor(rng.uniform() * rd) + 1.0) / rd;
    x = -x / rd + eps;
    if (t >= spec.burn_in) out.push_back(x);
  }
  return Series(std::move(out));
}

Series simulate_mar(const ModelSpec& spec, std::size_t n) {
  const double phi = spec.param("phi", 0.5);
  if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("mar requires 0 < phi < 1");
  Rng rng(spec.seed, 0);
  double x = rng.unit_frechet();  // exact stationary start
  std::vector<double> out;
  out.reserve(n);
  for (long t = 0; t < spec.burn_in + static_cast<long>(n); ++t) {
    x = std::max(phi * x, (1.0 - phi) * rng.unit_frechet());
    if (t >= spec.burn_in) out.push_back(x);
  }
  return Series(std::move(out));
}

// Conditional df of the logistic (Gumbel-Hougaard) copula given the first
// coordinate: h(v|u) = C(u,v) (a^d + b^d)^{1/d - 1} a^{d-1} / u with
// a = -log u, b = -log v, d = 1/alpha. Strictly increasing in v.
double logistic_conditional(double u, double v, double delta) {
  const double a = -std::log(u);
  const double b = -std::log(v);
  double sum_pow, root;
  if (delta == 2.0) {
    root = std::hypot(a, b);
    sum_pow = root * root;
  } else {
    sum_pow = std::pow(a, delta) + std::pow(b, delta);
    root = std::pow(sum_pow, 1.0 / delta);
  }
  const double c = std::exp(-root);
  // (a^d + b^d)^{(1-d)/d} = root / sum_pow
  return c * (root / sum_pow) * std::pow(a, delta - 1.0) / u;
}

Series simulate_markov_logistic(const ModelSpec& spec, std::size_t n) {
  const double alpha = spec.param("alpha", 0.5);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("markov-logistic requires 0 < alpha < 1");
  }
  const double delta = 1.0 / alpha;
  Rng rng(spec.seed, 0);

  double u = rng.uniform();  // copula-scale state, exact stationary marginal
  std::vector<double> out;
  out.reserve(n);
  const long total = spec.burn_in + static_cast<long>(n);
  for (long t = 0; t < total; ++t) {
    if (t > 0) {
      const double w = rng.uniform();
      double lo = 1e-15, hi = 1.0 - 1e-15;
      // bisection to 1e-10 on the conditional df
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (logistic_conditional(u, mid, delta) < w) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      u = 0.5 * (lo + hi);
    }
    if (t >= spec.burn_in) out.push_back(-std::log(-std::log(u)));
  }
  return Series(std::move(out));
}

Series simulate_garch11(const ModelSpec& spec, std::size_t n) {
  const double lambda = spec.param("lambda", 0.25);
  const double beta = spec.param("beta", 0.7);
  const double magnitudes = spec.param("magnitudes", 0.0);
  if (!(lambda >= 0.0 && beta >= 0.0 && lambda + beta < 1.0)) {
    throw std::invalid_argument("garch11 requires lambda >= 0, beta >= 0, lambda + beta < 1");
  }
  if (magnitudes != 0.0 && magnitudes != 1.0) {
    throw std::invalid_argument("garch11 parameter 'magnitudes' must be 0 or 1");
  }
  const double omega = 1.0 - lambda - beta;  // unit unconditional variance
  Rng rng(spec.seed, 0);
  double x = 0.0;
  double sigma2 = 1.0;
  std::vector<double> out;
  out.reserve(n);
  for (long t = 0; t < spec.burn_in + static_cast<long>(n); ++t) {
    sigma2 = omega + lambda * x * x + beta * sigma2;
    x = std::sqrt(sigma2) * rng.normal();
    // magnitudes=1 analyzes |X_t|: extremes of the volatility process itself
    if (t >= spec.burn_in) out.push_back(magnitudes == 1.0 ? std::abs(x) : x);
  }
  return Series(std::move(out));
}

}  // namespace

Series simulate(const ModelSpec& spec, std::size_t n) {
  if (n < 1) throw std::invalid_argument("simulation length must be positive");
  if (spec.burn_in < 0) throw std::invalid_argument("burn-in must be nonnegative");
  switch (spec.id) {
    case ModelId::ArCauchy: return simulate_ar_cauchy(spec, n);
    case ModelId::ArUnif: return simulate_ar_unif(spec, n);
    case ModelId::Mar: return simulate_mar(spec, n);
    case ModelId::MarkovLogistic: return simulate_markov_logistic(spec, n);
    case ModelId::Garch11: return simulate_garch11(spec, n);
    case ModelId::MovingMaxima: {
      if (!spec.signature) throw std::invalid_argument("mm model requires a signature");
      return mm_simulate(*spec.signature, n, spec.seed);
    }
  }
  throw std::invalid_argument("unknown model id");
}

namespace {

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

std::optional<ReferenceTheta> reference_theta(const ModelSpec& spec) {
  switch (spec.id) {
    case ModelId::MovingMaxima:
      if (!spec.signature) return std::nullopt;
      return ReferenceTheta{mm_extremal_index(*spec.signature),
                            "exact: sum over rows of the largest signature coefficient"};
    case ModelId::Garch11:
      // The tabulated 0.3 is the magnitude-series index; the signed series
      // clusters less (block oracle ~0.48 with too much level drift to
      // record, see data/reference_theta.csv).
      if (near(spec.param("lambda", 0.25), 0.25) && near(spec.param("beta", 0.7), 0.7) &&
          near(spec.param("magnitudes", 0.0), 1.0)) {
        return ReferenceTheta{0.3, "tabulated (Laurini & Tawn 2012), magnitude series"};
      }
      return std::nullopt;
    case ModelId::ArCauchy:
      if (near(spec.param("rho", -0.6), -0.6)) {
        return ReferenceTheta{0.6370, "oracle: see data/reference_theta.csv"};
      }
      return std::nullopt;
    case ModelId::ArUnif:
      if (near(spec.param("r", 2.0), 2.0)) {
        return ReferenceTheta{0.7523, "oracle: see data/reference_theta.csv"};
      }
      return std::nullopt;
    case ModelId::Mar:
      if (near(spec.param("phi", 0.5), 0.5)) {
        return ReferenceTheta{0.5022, "oracle: see data/reference_theta.csv"};
      }
      return std::nullopt;
    case ModelId::MarkovLogistic:
      if (near(spec.param("alpha", 0.5), 0.5)) {
        return ReferenceTheta{0.3287, "oracle: see data/reference_theta.csv"};
      }
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace exidx
