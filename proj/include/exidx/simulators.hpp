#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "exidx/mm.hpp"
#include "exidx/series.hpp"

namespace exidx {

enum class ModelId { ArCauchy, ArUnif, Mar, MarkovLogistic, Garch11, MovingMaxima };

std::string to_string(ModelId id);
ModelId model_from_string(const std::string& name);

// Declarative description of one simulated model. Unset parameters fall back
// to the study defaults (rho=-0.6, r=2, phi=0.5, alpha=0.5, lambda=0.25,
// beta=0.7).
struct ModelSpec {
  ModelId id = ModelId::Mar;
  std::map<std::string, double> params;
  std::optional<MMSignature> signature;  // required for MovingMaxima
  long burn_in = 1000;
  std::uint64_t seed = 1;

  double param(const std::string& name, double fallback) const;
};

// n observations after burn-in; deterministic given the seed.
//  ar-cauchy        X_t = rho X_{t-1} + eps_t, eps standard Cauchy
//  ar-unif          X_t = -X_{t-1}/r + eps_t, eps uniform on {1/r,...,1};
//                   stationary marginal is exactly uniform(0,1)
//  mar              X_t = max(phi X_{t-1}, (1-phi) eps_t), eps unit Frechet
//  markov-logistic  Gumbel marginals, consecutive pairs coupled by the
//                   logistic copula exp(-((-log u)^(1/a)+(-log v)^(1/a))^a);
//                   transitions sampled by bisecting the conditional df
//  garch11          X_t = sigma_t eta_t, sigma^2 = omega + lambda X_{t-1}^2
//                   + beta sigma_{t-1}^2, omega = 1-lambda-beta (unit
//                   unconditional variance), eta standard Gaussian
//  mm               finite moving maxima over the given signature
Series simulate(const ModelSpec& spec, std::size_t n);

struct ReferenceTheta {
  double theta = 0.0;
  std::string source;  // provenance: exact form, tabulated value, or oracle run
};

// Ground-truth extremal index for rmse/abias accounting, when known for the
// spec's parameters. Values tagged "oracle" were produced by the block
// subsampling tool in tests/ and are recorded in data/reference_theta.csv.
std::optional<ReferenceTheta> reference_theta(const ModelSpec& spec);

}  // namespace exidx
