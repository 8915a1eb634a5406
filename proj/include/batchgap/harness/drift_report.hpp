#pragma once

#include <iosfwd>
#include <vector>

#include "batchgap/harness/config.hpp"
#include "batchgap/sde.hpp"

namespace batchgap::harness {

// Monte Carlo check of E[sign(m)] = erf(sqrt(B/2) mu / sigma) for one cell.
struct DriftRow {
  double mu = 0.0;
  double sigma = 0.0;
  long batch_size = 0;
  SignExpectation estimate;
  double prediction = 0.0;
  bool pass = false;
};

// |estimate - prediction| <= z * max(SE, 1/n). When every draw has the same
// sign the empirical SE is 0; the 1/n floor is the estimator's resolution.
bool within_sampling_error(const SignExpectation& estimate, double prediction, double z);

// Cells in (mu, sigma, B) row-major order; cell i draws from
// Rng(derive_seed(seed, i)) so results do not depend on the worker count.
std::vector<DriftRow> drift_report(const DriftReportConfig& config);

void write_drift_csv(const std::vector<DriftRow>& rows, std::ostream& out);

}  // namespace batchgap::harness
