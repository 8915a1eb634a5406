#include "batchgap/harness/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "batchgap/harness/csv.hpp"

namespace batchgap::harness {

SdeModel make_sde_model(const SdeSimConfig& config, const Problem& problem) {
  NoiseModel noise = config.covariance_diag.empty()
                         ? NoiseModel::isotropic(problem.dim(), config.sigma, config.batch_size)
                         : NoiseModel{config.covariance_diag, config.batch_size};
  require_same_dim(noise.covariance_diag, ParamVector(problem.dim()), "sde covariance");
  VectorField gradient = [&problem](const ParamVector& x) { return problem.gradient(x); };
  try {
    return config.model == SdeKind::sgd ? sgd_sde(gradient, noise, config.eta, config.dt)
                                        : signsgd_sde(gradient, noise, config.eta, config.dt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

SdeSimResult simulate_sde(const SdeSimConfig& config) {
  config.validate();
  const auto problem = make_problem(config.problem);
  const SdeModel model = make_sde_model(config, *problem);
  Rng init_rng = Rng(config.seed).split(0);
  const ParamVector x0 =
      config.x0 ? *config.x0 : initial_point(config.problem.init, problem->dim(), init_rng);
  require_same_dim(x0, ParamVector(problem->dim()), "sde x0");

  SdeSimResult result;
  for (long k = 0; k <= config.steps; ++k) {
    if (k % config.log_every == 0 || k == config.steps) {
      result.logged_steps.push_back(k);
      result.times.push_back(static_cast<double>(k) * model.dt);
    }
  }
  const std::size_t n_logged = result.logged_steps.size();
  std::vector<double> sum(n_logged, 0.0);
  std::vector<double> sum_sq(n_logged, 0.0);
  result.mean_state.assign(n_logged, ParamVector(problem->dim()));

  for (long p = 0; p < config.paths; ++p) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(p) + 1));
    const auto path = euler_maruyama(model, x0, config.steps, rng);
    std::vector<ParamVector> kept;
    for (std::size_t i = 0; i < n_logged; ++i) {
      const ParamVector& x = path[static_cast<std::size_t>(result.logged_steps[i])];
      const double loss = problem->loss(x);
      sum[i] += loss;
      sum_sq[i] += loss * loss;
      axpy(1.0 / static_cast<double>(config.paths), x, result.mean_state[i]);
      if (p < config.record_paths) kept.push_back(x);
    }
    if (p < config.record_paths) result.recorded.push_back(std::move(kept));
  }
  const auto n = static_cast<double>(config.paths);
  for (std::size_t i = 0; i < n_logged; ++i) {
    const double mean = sum[i] / n;
    result.mean_loss.push_back(mean);
    const double var = config.paths > 1 ? std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0)) : 0.0;
    result.se_loss.push_back(std::sqrt(var / n));
  }
  return result;
}

void write_sde_outputs(const SdeSimConfig& config, const SdeSimResult& result,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream mean(out_dir / "sde_mean.csv", std::ios::binary);
  if (!mean) throw std::runtime_error("cannot write sde_mean.csv");
  const std::size_t d = result.mean_state.empty() ? 0 : result.mean_state.front().size();
  mean << "step,t,mean_loss,se_loss";
  for (std::size_t j = 0; j < d; ++j) mean << ",mean_x_" << j;
  mean << '\n';
  for (std::size_t i = 0; i < result.logged_steps.size(); ++i) {
    mean << result.logged_steps[i] << ',' << format_number(result.times[i]) << ','
         << format_number(result.mean_loss[i]) << ',' << format_number(result.se_loss[i]);
    for (double x : result.mean_state[i]) mean << ',' << format_number(x);
    mean << '\n';
  }
  if (config.record_paths == 0) return;
  std::ofstream paths(out_dir / "sde_paths.csv", std::ios::binary);
  if (!paths) throw std::runtime_error("cannot write sde_paths.csv");
  paths << "path,step,t";
  for (std::size_t j = 0; j < d; ++j) paths << ",x_" << j;
  paths << '\n';
  for (std::size_t p = 0; p < result.recorded.size(); ++p) {
    for (std::size_t i = 0; i < result.logged_steps.size(); ++i) {
      paths << p << ',' << result.logged_steps[i] << ',' << format_number(result.times[i]);
      for (double x : result.recorded[p][i]) paths << ',' << format_number(x);
      paths << '\n';
    }
  }
}

}  // namespace batchgap::harness
