#include "batchgap/harness/drift_report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "batchgap/harness/csv.hpp"
#include "batchgap/harness/sweep.hpp"

namespace batchgap::harness {

bool within_sampling_error(const SignExpectation& estimate, double prediction, double z) {
  const double resolution = 1.0 / static_cast<double>(estimate.samples);
  return std::fabs(estimate.mean - prediction) <= z * std::max(estimate.std_error, resolution);
}

std::vector<DriftRow> drift_report(const DriftReportConfig& config) {
  config.validate();
  std::vector<DriftRow> rows;
  for (double mu : config.mus) {
    for (double sigma : config.sigmas) {
      for (long b : config.batch_sizes) {
        DriftRow row;
        row.mu = mu;
        row.sigma = sigma;
        row.batch_size = b;
        rows.push_back(row);
      }
    }
  }
  parallel_for(rows.size(), config.workers, [&](std::size_t i) {
    DriftRow& row = rows[i];
    Rng rng(derive_seed(config.seed, i));
    row.estimate = expected_sign_mc(row.mu, row.sigma, row.batch_size, config.n_samples, rng);
    row.prediction = predicted_sign_expectation(row.mu, row.sigma, row.batch_size);
    row.pass = within_sampling_error(row.estimate, row.prediction, config.z_threshold);
  });
  return rows;
}

void write_drift_csv(const std::vector<DriftRow>& rows, std::ostream& out) {
  out << "mu,sigma,batch_size,n_samples,estimate,prediction,std_error,pass\n";
  for (const DriftRow& r : rows) {
    out << format_number(r.mu) << ',' << format_number(r.sigma) << ',' << r.batch_size << ','
        << r.estimate.samples << ',' << format_number(r.estimate.mean) << ','
        << format_number(r.prediction) << ',' << format_number(r.estimate.std_error) << ','
        << (r.pass ? 1 : 0) << '\n';
  }
}

}  // namespace batchgap::harness
