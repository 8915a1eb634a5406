#include "batchgap/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace batchgap::harness {
namespace {

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const Json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing '" + key + "'");
  return get_or<T>(j, key, T{});
}

ParamVector parse_vector(const Json& j) { return ParamVector(j.get<std::vector<double>>()); }

InitSpec parse_init(const Json& j) {
  check_keys(j, "init", {"kind", "scale"});
  InitSpec init;
  const auto kind = get_or<std::string>(j, "kind", "ones");
  if (kind == "ones") {
    init.kind = InitKind::ones;
  } else if (kind == "gaussian") {
    init.kind = InitKind::gaussian;
  } else {
    throw ConfigError("init: unknown kind '" + kind + "'");
  }
  init.scale = get_or(j, "scale", 1.0);
  return init;
}

}  // namespace

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
}

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec) {
  if (spec.kind == ProblemKind::block_quadratic) {
    return std::make_unique<BlockQuadraticProblem>(build_hessian(spec.quadratic));
  }
  return std::make_unique<NoisyIsotropicProblem>(spec.isotropic);
}

ParamVector initial_point(const InitSpec& init, std::size_t dim, Rng& rng) {
  ParamVector w(dim, init.scale);
  if (init.kind == InitKind::gaussian) {
    for (auto& x : w) x = init.scale * rng.normal();
  }
  return w;
}

ScheduleSpec RunConfig::effective_schedule() const {
  ScheduleSpec s = schedule;
  s.peak_lr = optimizer.lr;
  s.total_steps = steps;
  return s;
}

void RunConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  try {
    optimizer.validate();
    effective_schedule().validate();
    if (problem.kind == ProblemKind::block_quadratic) {
      problem.quadratic.validate();
    } else {
      problem.isotropic.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void SweepConfig::validate() const {
  if (problems.empty()) throw ConfigError("sweep: no problems");
  if (optimizers.empty()) throw ConfigError("sweep: no optimizers");
  if (batch_sizes.empty()) throw ConfigError("sweep: no batch sizes");
  if (seeds.empty()) throw ConfigError("sweep: no seeds");
  for (const auto& o : optimizers) {
    if (o.learning_rates.empty()) throw ConfigError("sweep: optimizer '" + o.name + "' has no lrs");
  }
  for (long b : batch_sizes) {
    if (b < 1) throw ConfigError("sweep: batch sizes must be >= 1");
  }
  base.validate();
}

void DriftReportConfig::validate() const {
  if (mus.empty() || sigmas.empty() || batch_sizes.empty()) {
    throw ConfigError("drift report: empty grid axis");
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) throw ConfigError("drift report: sigma must be > 0");
  }
  for (long b : batch_sizes) {
    if (b < 1) throw ConfigError("drift report: batch sizes must be >= 1");
  }
  if (n_samples < 1) throw ConfigError("drift report: n_samples must be >= 1");
}

void SdeSimConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("sde: eta must be > 0");
  if (dt && !(*dt > 0.0)) throw ConfigError("sde: dt must be > 0");
  if (steps < 0 || paths < 1 || record_paths < 0 || log_every < 1) {
    throw ConfigError("sde: steps >= 0, paths >= 1, record_paths >= 0, log_every >= 1 required");
  }
  if (batch_size < 1) throw ConfigError("sde: batch_size must be >= 1");
  if (covariance_diag.empty() && !(sigma >= 0.0)) throw ConfigError("sde: sigma must be >= 0");
}

ProblemSpec parse_problem(const Json& j) {
  check_keys(j, "problem", {"kind", "layout", "eigenvalue_blocks", "rotation_seed",
                            "identity_rotations", "dim", "sigma", "init", "partition"});
  ProblemSpec spec;
  const auto kind = get_or<std::string>(j, "kind", "block_quadratic");
  if (kind == "block_quadratic") {
    spec.kind = ProblemKind::block_quadratic;
    const auto layout = parse_layout(get_or<std::string>(j, "layout", "heterogeneous"));
    spec.quadratic = BlockQuadraticSpec::make_default(layout, get_or<std::uint64_t>(j, "rotation_seed", 0));
    if (j.contains("eigenvalue_blocks")) {
      spec.quadratic.eigenvalue_blocks = j.at("eigenvalue_blocks").get<std::vector<std::vector<double>>>();
    }
    spec.quadratic.identity_rotations = get_or(j, "identity_rotations", false);
  } else if (kind == "noisy_isotropic") {
    spec.kind = ProblemKind::noisy_isotropic;
    spec.isotropic.dim = get_or<std::size_t>(j, "dim", 100);
    spec.isotropic.sigma = get_or(j, "sigma", 0.0);
  } else {
    throw ConfigError("problem: unknown kind '" + kind + "'");
  }
  if (j.contains("init")) spec.init = parse_init(j.at("init"));
  if (j.contains("partition")) spec.partition = j.at("partition").get<BlockPartition>();
  return spec;
}

OptimizerSpec parse_optimizer(const Json& j) {
  check_keys(j, "optimizer", {"rule", "lr", "beta", "beta1", "beta2", "eps", "clip",
                              "clip_fraction", "direction", "magnitude"});
  OptimizerSpec spec;
  try {
    spec.rule = parse_rule(require<std::string>(j, "rule", "optimizer"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spec.lr = get_or(j, "lr", spec.lr);
  spec.beta = get_or(j, "beta", spec.beta);
  spec.beta1 = get_or(j, "beta1", spec.beta1);
  spec.beta2 = get_or(j, "beta2", spec.beta2);
  spec.eps = get_or(j, "eps", spec.eps);
  if (j.contains("clip") && !j.at("clip").is_null()) spec.clip = j.at("clip").get<double>();
  spec.clip_fraction = get_or(j, "clip_fraction", spec.clip_fraction);
  if (j.contains("direction")) {
    spec.direction = std::make_shared<const OptimizerSpec>(parse_optimizer(j.at("direction")));
  }
  if (j.contains("magnitude")) {
    spec.magnitude = std::make_shared<const OptimizerSpec>(parse_optimizer(j.at("magnitude")));
  }
  return spec;
}

ScheduleSpec parse_schedule(const Json& j) {
  check_keys(j, "schedule", {"kind", "warmup_steps", "warmup_fraction", "floor_lr",
                             "decay_fraction", "decay_shape"});
  ScheduleSpec spec;
  try {
    spec.kind = parse_schedule_kind(get_or<std::string>(j, "kind", "constant"));
    spec.decay_shape = parse_decay_shape(get_or<std::string>(j, "decay_shape", "linear"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spec.warmup_steps = get_or(j, "warmup_steps", 0L);
  spec.floor_lr = get_or(j, "floor_lr", spec.floor_lr);
  spec.decay_fraction = get_or(j, "decay_fraction", spec.decay_fraction);
  return spec;
}

RunConfig parse_run_config(const Json& j) {
  check_keys(j, "run", {"problem", "optimizer", "schedule", "batch_size", "steps", "seed",
                        "log_every", "metrics"});
  RunConfig c;
  if (j.contains("problem")) c.problem = parse_problem(j.at("problem"));
  c.optimizer = parse_optimizer(require<Json>(j, "optimizer", "run"));
  if (j.contains("schedule")) c.schedule = parse_schedule(j.at("schedule"));
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.steps = get_or(j, "steps", c.steps);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.log_every = get_or(j, "log_every", c.log_every);
  if (j.contains("schedule") && j.at("schedule").contains("warmup_fraction")) {
    const double fraction = j.at("schedule").at("warmup_fraction").get<double>();
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("warmup_fraction must lie in [0, 1]");
    c.schedule.warmup_steps = std::lround(fraction * static_cast<double>(c.steps));
  }
  if (j.contains("metrics")) {
    const Json& m = j.at("metrics");
    check_keys(m, "metrics", {"diagnostics", "clipping"});
    c.metrics.diagnostics = get_or(m, "diagnostics", true);
    c.metrics.clipping = get_or(m, "clipping", true);
  }
  c.validate();
  return c;
}

SweepConfig parse_sweep_config(const Json& j) {
  check_keys(j, "sweep", {"base", "problems", "optimizers", "batch_sizes", "seeds", "num_seeds",
                          "workers", "write_runs"});
  SweepConfig c;
  Json base = require<Json>(j, "base", "sweep");
  if (!base.contains("optimizer") && j.contains("optimizers") && !j.at("optimizers").empty()) {
    base["optimizer"] = j.at("optimizers").at(0).at("spec");
  }
  c.base = parse_run_config(base);
  if (j.contains("problems")) {
    for (const Json& p : j.at("problems")) {
      check_keys(p, "sweep problem", {"name", "spec"});
      c.problems.push_back({require<std::string>(p, "name", "sweep problem"),
                            parse_problem(require<Json>(p, "spec", "sweep problem"))});
    }
  } else {
    c.problems.push_back({"problem", c.base.problem});
  }
  for (const Json& o : require<Json>(j, "optimizers", "sweep")) {
    check_keys(o, "sweep optimizer", {"name", "spec", "learning_rates"});
    c.optimizers.push_back({require<std::string>(o, "name", "sweep optimizer"),
                            parse_optimizer(require<Json>(o, "spec", "sweep optimizer")),
                            require<std::vector<double>>(o, "learning_rates", "sweep optimizer")});
  }
  c.batch_sizes = require<std::vector<long>>(j, "batch_sizes", "sweep");
  if (j.contains("seeds")) {
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    const auto n = get_or<std::uint64_t>(j, "num_seeds", 10);
    for (std::uint64_t s = 0; s < n; ++s) c.seeds.push_back(s);
  }
  c.workers = get_or(j, "workers", 0U);
  c.write_runs = get_or(j, "write_runs", true);
  c.validate();
  return c;
}

DriftReportConfig parse_drift_config(const Json& j) {
  check_keys(j, "drift report", {"mus", "sigmas", "batch_sizes", "n_samples", "seed",
                                 "z_threshold", "workers"});
  DriftReportConfig c;
  c.mus = get_or(j, "mus", c.mus);
  c.sigmas = get_or(j, "sigmas", c.sigmas);
  c.batch_sizes = get_or(j, "batch_sizes", c.batch_sizes);
  c.n_samples = get_or(j, "n_samples", c.n_samples);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.z_threshold = get_or(j, "z_threshold", c.z_threshold);
  c.workers = get_or(j, "workers", 0U);
  c.validate();
  return c;
}

SdeSimConfig parse_sde_config(const Json& j) {
  check_keys(j, "sde", {"model", "problem", "covariance_diag", "sigma", "batch_size", "eta", "dt",
                        "steps", "paths", "record_paths", "log_every", "seed", "x0"});
  SdeSimConfig c;
  const auto model = get_or<std::string>(j, "model", "signsgd");
  if (model == "sgd") {
    c.model = SdeKind::sgd;
  } else if (model == "signsgd") {
    c.model = SdeKind::signsgd;
  } else {
    throw ConfigError("sde: unknown model '" + model + "'");
  }
  if (j.contains("problem")) {
    c.problem = parse_problem(j.at("problem"));
  } else {
    c.problem.kind = ProblemKind::noisy_isotropic;
  }
  if (j.contains("covariance_diag")) c.covariance_diag = parse_vector(j.at("covariance_diag"));
  c.sigma = get_or(j, "sigma", c.sigma);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.eta = get_or(j, "eta", c.eta);
  if (j.contains("dt") && !j.at("dt").is_null()) c.dt = j.at("dt").get<double>();
  c.steps = get_or(j, "steps", c.steps);
  c.paths = get_or(j, "paths", c.paths);
  c.record_paths = get_or(j, "record_paths", c.record_paths);
  c.log_every = get_or(j, "log_every", c.log_every);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("x0")) c.x0 = parse_vector(j.at("x0"));
  c.validate();
  return c;
}

Json to_json(const ProblemSpec& spec) {
  Json j;
  if (spec.kind == ProblemKind::block_quadratic) {
    j["kind"] = "block_quadratic";
    j["layout"] = std::string(to_string(spec.quadratic.layout));
    j["eigenvalue_blocks"] = spec.quadratic.eigenvalue_blocks;
    j["rotation_seed"] = spec.quadratic.rotation_seed;
    if (spec.quadratic.identity_rotations) j["identity_rotations"] = true;
  } else {
    j["kind"] = "noisy_isotropic";
    j["dim"] = spec.isotropic.dim;
    j["sigma"] = spec.isotropic.sigma;
  }
  j["init"] = {{"kind", spec.init.kind == InitKind::ones ? "ones" : "gaussian"},
               {"scale", spec.init.scale}};
  if (spec.partition) j["partition"] = *spec.partition;
  return j;
}

Json to_json(const OptimizerSpec& spec) {
  Json j;
  j["rule"] = std::string(to_string(spec.rule));
  j["lr"] = spec.lr;
  switch (spec.rule) {
    case OptimizerRule::sgd:
    case OptimizerRule::signed_momentum:
      j["beta"] = spec.beta;
      break;
    case OptimizerRule::adaptive_clip:
      j["beta"] = spec.beta;
      j["clip_fraction"] = spec.clip_fraction;
      break;
    case OptimizerRule::adam:
      j["beta1"] = spec.beta1;
      j["beta2"] = spec.beta2;
      j["eps"] = spec.eps;
      break;
    case OptimizerRule::signsgd:
      break;
    case OptimizerRule::graft:
      j["direction"] = to_json(*spec.direction);
      j["magnitude"] = to_json(*spec.magnitude);
      break;
  }
  if (spec.clip) j["clip"] = *spec.clip;
  return j;
}

Json to_json(const ScheduleSpec& spec) {
  return Json{{"kind", std::string(to_string(spec.kind))},
              {"warmup_steps", spec.warmup_steps},
              {"floor_lr", spec.floor_lr},
              {"decay_fraction", spec.decay_fraction},
              {"decay_shape", std::string(to_string(spec.decay_shape))}};
}

Json to_json(const RunConfig& c) {
  return Json{{"problem", to_json(c.problem)},
              {"optimizer", to_json(c.optimizer)},
              {"schedule", to_json(c.schedule)},
              {"batch_size", c.batch_size},
              {"steps", c.steps},
              {"seed", c.seed},
              {"log_every", c.log_every},
              {"metrics", {{"diagnostics", c.metrics.diagnostics}, {"clipping", c.metrics.clipping}}}};
}

}  // namespace batchgap::harness
