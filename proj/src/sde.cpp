#include "batchgap/sde.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "batchgap/core/special.hpp"

namespace batchgap {

void NoiseModel::validate(bool require_positive) const {
  if (batch_size < 1) throw std::invalid_argument("noise model: batch size must be >= 1");
  for (double s : covariance_diag) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("noise model: covariance entries must be finite and >= 0");
    }
    if (require_positive && s == 0.0) {
      throw std::invalid_argument("noise model: SignSGD drift needs strictly positive covariance");
    }
  }
}

NoiseModel NoiseModel::isotropic(std::size_t dim, double sigma, long batch_size) {
  return NoiseModel{ParamVector(dim, sigma * sigma), batch_size};
}

namespace {

void check_dims(const ParamVector& g, const NoiseModel& noise) {
  require_same_dim(g, noise.covariance_diag, "sde");
}

double erf_argument(double g, double covariance, long batch_size) {
  return (std::sqrt(static_cast<double>(batch_size)) * g) * (1.0 / std::sqrt(2.0 * covariance));
}

}  // namespace

ParamVector signsgd_drift(const ParamVector& gradient, const NoiseModel& noise) {
  check_dims(gradient, noise);
  ParamVector out(gradient.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -batchgap::erf(erf_argument(gradient[i], noise.covariance_diag[i], noise.batch_size));
  }
  return out;
}

ParamVector signsgd_diffusion(const ParamVector& gradient, const NoiseModel& noise, double eta) {
  check_dims(gradient, noise);
  ParamVector out(gradient.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e =
        batchgap::erf(erf_argument(gradient[i], noise.covariance_diag[i], noise.batch_size));
    out[i] = std::sqrt(eta * std::max(0.0, 1.0 - e * e));
  }
  return out;
}

ParamVector sgd_diffusion(const NoiseModel& noise, double eta) {
  ParamVector out(noise.covariance_diag.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(eta * noise.covariance_diag[i] / static_cast<double>(noise.batch_size));
  }
  return out;
}

SdeModel sgd_sde(VectorField gradient, const NoiseModel& noise, double eta,
                 std::optional<double> dt) {
  noise.validate(false);
  if (!(eta > 0.0)) throw std::invalid_argument("sgd_sde: eta must be > 0");
  SdeModel model;
  model.eta = eta;
  model.dt = dt.value_or(eta);
  model.drift = [gradient](const ParamVector& x) { return scaled(-1.0, gradient(x)); };
  const ParamVector diffusion = sgd_diffusion(noise, eta);
  model.diffusion_diag = [diffusion](const ParamVector& x) {
    require_same_dim(x, diffusion, "sgd_sde");
    return diffusion;
  };
  return model;
}

SdeModel signsgd_sde(VectorField gradient, const NoiseModel& noise, double eta,
                     std::optional<double> dt) {
  noise.validate(true);
  if (!(eta > 0.0)) throw std::invalid_argument("signsgd_sde: eta must be > 0");
  SdeModel model;
  model.eta = eta;
  model.dt = dt.value_or(eta);
  model.drift = [gradient, noise](const ParamVector& x) {
    return signsgd_drift(gradient(x), noise);
  };
  model.diffusion_diag = [gradient, noise, eta](const ParamVector& x) {
    return signsgd_diffusion(gradient(x), noise, eta);
  };
  return model;
}

std::vector<ParamVector> euler_maruyama(const SdeModel& model, const ParamVector& x0, long steps,
                                        Rng& rng) {
  if (!(model.dt > 0.0)) throw std::invalid_argument("euler_maruyama: dt must be > 0");
  if (steps < 0) throw std::invalid_argument("euler_maruyama: steps must be >= 0");
  const double sqrt_dt = std::sqrt(model.dt);
  std::vector<ParamVector> path;
  path.reserve(static_cast<std::size_t>(steps) + 1);
  path.push_back(x0);
  ParamVector x = x0;
  for (long k = 0; k < steps; ++k) {
    const ParamVector drift = model.drift(x);
    const ParamVector diffusion = model.diffusion_diag(x);
    require_same_dim(x, drift, "euler_maruyama drift");
    require_same_dim(x, diffusion, "euler_maruyama diffusion");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = rng.normal();
      x[i] = x[i] + drift[i] * model.dt + diffusion[i] * sqrt_dt * z;
    }
    if (!x.all_finite()) {
      throw NonFiniteStateError(k + 1, "euler_maruyama: non-finite state at step " +
                                           std::to_string(k + 1));
    }
    path.push_back(x);
  }
  return path;
}

namespace {

void finish(SignExpectation& e) {
  const auto n = static_cast<double>(e.samples);
  e.mean = static_cast<double>(e.positives - e.negatives) / n;
  const double second = static_cast<double>(e.positives + e.negatives) / n;
  const double var = std::max(0.0, second - e.mean * e.mean);
  // Sample variance is var * n / (n - 1); its standard error divides by n.
  e.std_error = e.samples > 1 ? std::sqrt(var / (n - 1.0)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

SignExpectation expected_sign_mc(double mu, double sigma, long batch_size, long n_samples,
                                 Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("expected_sign_mc: n_samples must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("expected_sign_mc: sigma must be > 0");
  if (batch_size < 1) throw std::invalid_argument("expected_sign_mc: batch size must be >= 1");
  const double scale = sigma / std::sqrt(static_cast<double>(batch_size));
  SignExpectation e;
  e.samples = n_samples;
  for (long k = 0; k < n_samples; ++k) {
    const double m = mu + scale * rng.normal();
    if (m > 0.0) {
      ++e.positives;
    } else if (m < 0.0) {
      ++e.negatives;
    }
  }
  finish(e);
  return e;
}

SignExpectation merge(const SignExpectation& a, const SignExpectation& b) {
  SignExpectation out;
  out.positives = a.positives + b.positives;
  out.negatives = a.negatives + b.negatives;
  out.samples = a.samples + b.samples;
  if (out.samples > 0) finish(out);
  return out;
}

double predicted_sign_expectation(double mu, double sigma, long batch_size) {
  if (!(sigma > 0.0)) throw std::invalid_argument("predicted_sign_expectation: sigma must be > 0");
  return batchgap::erf(erf_argument(mu, sigma * sigma, batch_size));
}

}  // namespace batchgap
