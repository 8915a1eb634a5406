#pragma once
// Diffusion models of SGD and SignSGD with diagonal gradient-noise covariance.
//
//   SGD:      dX = -grad f(X) dt + sqrt(eta Sigma / B) dW
//   SignSGD:  dX = -erf(sqrt(B/2) Sigma^(-1/2) grad f(X)) dt
//                  + sqrt(eta) sqrt(1 - erf(...)^2) dW        (componentwise)
//
// The SignSGD drift grows like sqrt(B) until erf saturates; the SGD drift does
// not depend on B at all.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "batchgap/core/param_vector.hpp"
#include "batchgap/core/rng.hpp"

namespace batchgap {

using VectorField = std::function<ParamVector(const ParamVector&)>;

struct NoiseModel {
  ParamVector covariance_diag;  // diagonal of Sigma at batch size 1
  long batch_size = 1;

  // Throws on B < 1, on negative or non-finite entries, and, when
  // require_positive is set, on any zero entry (Sigma^(-1/2) must exist).
  void validate(bool require_positive) const;

  static NoiseModel isotropic(std::size_t dim, double sigma, long batch_size);
};

struct SdeModel {
  VectorField drift;
  VectorField diffusion_diag;
  double eta = 0.0;
  double dt = 0.0;
};

// dt defaults to eta.
SdeModel sgd_sde(VectorField gradient, const NoiseModel& noise, double eta,
                 std::optional<double> dt = std::nullopt);
SdeModel signsgd_sde(VectorField gradient, const NoiseModel& noise, double eta,
                     std::optional<double> dt = std::nullopt);

// Drift and diffusion as functions of the gradient value. The erf argument is
// formed as (sqrt(B) * g_i) * (1 / sqrt(2 Sigma_ii)) so that the pair
// (B, g) and (1, sqrt(B) * g) yields bit-identical drift.
ParamVector signsgd_drift(const ParamVector& gradient, const NoiseModel& noise);
ParamVector signsgd_diffusion(const ParamVector& gradient, const NoiseModel& noise, double eta);
ParamVector sgd_diffusion(const NoiseModel& noise, double eta);

class NonFiniteStateError : public std::runtime_error {
 public:
  NonFiniteStateError(long step, const std::string& what) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// x_{k+1} = x_k + drift(x_k) dt + diffusion(x_k) sqrt(dt) z_k. Returns
// steps + 1 states. Throws NonFiniteStateError naming the first bad step.
std::vector<ParamVector> euler_maruyama(const SdeModel& model, const ParamVector& x0, long steps,
                                        Rng& rng);

struct SignExpectation {
  double mean = 0.0;
  double std_error = 0.0;
  long positives = 0;
  long negatives = 0;
  long samples = 0;
};

// Monte Carlo estimate of E[sign(m)], m ~ N(mu, sigma^2 / B).
SignExpectation expected_sign_mc(double mu, double sigma, long batch_size, long n_samples,
                                 Rng& rng);
// Count-weighted merge of independent estimates.
SignExpectation merge(const SignExpectation& a, const SignExpectation& b);
// erf(sqrt(B/2) mu / sigma), formed like signsgd_drift.
double predicted_sign_expectation(double mu, double sigma, long batch_size);

}  // namespace batchgap
