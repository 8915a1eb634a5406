#pragma once

#include <filesystem>
#include <vector>

#include "batchgap/harness/config.hpp"
#include "batchgap/sde.hpp"

namespace batchgap::harness {

struct SdeSimResult {
  std::vector<double> times;      // per logged step
  std::vector<double> mean_loss;  // across paths
  std::vector<double> se_loss;
  std::vector<ParamVector> mean_state;
  // Full trajectories of the first `record_paths` paths (logged steps only).
  std::vector<std::vector<ParamVector>> recorded;
  std::vector<long> logged_steps;
};

SdeModel make_sde_model(const SdeSimConfig& config, const Problem& problem);

// Simulates `paths` independent Euler-Maruyama trajectories; path p uses
// Rng(derive_seed(seed, p)).
SdeSimResult simulate_sde(const SdeSimConfig& config);

void write_sde_outputs(const SdeSimConfig& config, const SdeSimResult& result,
                       const std::filesystem::path& out_dir);

}  // namespace batchgap::harness
