#pragma once
// Experiment configuration and its JSON form. Unknown keys are rejected so a
// misspelled field fails loudly instead of silently taking a default.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "batchgap/core/param_vector.hpp"
#include "batchgap/core/rng.hpp"
#include "batchgap/optimizers.hpp"
#include "batchgap/problems.hpp"
#include "batchgap/schedulers.hpp"

namespace batchgap::harness {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitKind { ones, gaussian };

struct InitSpec {
  InitKind kind = InitKind::ones;
  double scale = 1.0;
};

enum class ProblemKind { block_quadratic, noisy_isotropic };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::block_quadratic;
  BlockQuadraticSpec quadratic = BlockQuadraticSpec::make_default(HessianLayout::heterogeneous);
  NoisyIsotropicSpec isotropic;
  InitSpec init;
  // Overrides the problem's own block partition for the per-block metrics.
  std::optional<BlockPartition> partition;
};

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec);
ParamVector initial_point(const InitSpec& init, std::size_t dim, Rng& rng);

struct MetricsFlags {
  bool diagnostics = true;
  bool clipping = true;
};

struct RunConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  // peak_lr and total_steps are taken from optimizer.lr and steps.
  ScheduleSpec schedule;
  long batch_size = 1;
  long steps = 0;
  std::uint64_t seed = 0;
  long log_every = 1;
  MetricsFlags metrics;

  ScheduleSpec effective_schedule() const;
  void validate() const;
};

struct SweepProblem {
  std::string name;
  ProblemSpec spec;
};

struct SweepOptimizer {
  std::string name;
  OptimizerSpec spec;
  std::vector<double> learning_rates;
};

struct SweepConfig {
  RunConfig base;
  std::vector<SweepProblem> problems;
  std::vector<SweepOptimizer> optimizers;
  std::vector<long> batch_sizes;
  std::vector<std::uint64_t> seeds;
  unsigned workers = 0;  // 0: hardware concurrency
  bool write_runs = true;

  void validate() const;
};

struct DriftReportConfig {
  std::vector<double> mus{-1.0, -0.1, 0.0, 0.1, 1.0};
  std::vector<double> sigmas{0.5, 1.0, 2.0};
  std::vector<long> batch_sizes{1, 4, 16};
  long n_samples = 1000000;
  std::uint64_t seed = 0;
  double z_threshold = 4.0;
  unsigned workers = 0;

  void validate() const;
};

enum class SdeKind { sgd, signsgd };

struct SdeSimConfig {
  SdeKind model = SdeKind::signsgd;
  ProblemSpec problem;
  ParamVector covariance_diag;  // empty: isotropic with `sigma`
  double sigma = 1.0;
  long batch_size = 1;
  double eta = 1e-3;
  std::optional<double> dt;
  long steps = 1000;
  long paths = 100;
  long record_paths = 0;
  long log_every = 1;
  std::uint64_t seed = 0;
  std::optional<ParamVector> x0;

  void validate() const;
};

ProblemSpec parse_problem(const Json& j);
OptimizerSpec parse_optimizer(const Json& j);
ScheduleSpec parse_schedule(const Json& j);
RunConfig parse_run_config(const Json& j);
SweepConfig parse_sweep_config(const Json& j);
DriftReportConfig parse_drift_config(const Json& j);
SdeSimConfig parse_sde_config(const Json& j);

Json to_json(const ProblemSpec& spec);
Json to_json(const OptimizerSpec& spec);
Json to_json(const ScheduleSpec& spec);
Json to_json(const RunConfig& config);

Json load_json_file(const std::string& path);

}  // namespace batchgap::harness
