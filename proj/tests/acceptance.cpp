// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "batchgap/core/rng.hpp"
#include "batchgap/core/special.hpp"
#include "batchgap/harness/config.hpp"
#include "batchgap/harness/drift_report.hpp"
#include "batchgap/harness/run.hpp"
#include "batchgap/harness/sweep.hpp"
#include "batchgap/metrics.hpp"
#include "batchgap/optimizers.hpp"
#include "batchgap/problems.hpp"
#include "batchgap/sde.hpp"

#ifndef BATCHGAP_CONFIG_DIR
#define BATCHGAP_CONFIG_DIR "configs"
#endif

using namespace batchgap;
using namespace batchgap::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

ParamVector random_vector(Rng& rng, std::size_t d, double scale = 1.0) {
  ParamVector v(d);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// ---------------------------------------------------------------------------

Outcome hessian_construction() {
  Outcome o;
  const auto start = Clock::now();
  const double expected[9] = {1, 2, 3, 99, 100, 101, 4998, 4999, 5000};
  double worst_rel = 0.0, het_max = 0.0, hom_min = INFINITY;
  for (auto layout : {HessianLayout::heterogeneous, HessianLayout::homogeneous}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = build_hessian(BlockQuadraticSpec::make_default(layout, seed));
      const Eigen::VectorXd eig = p.spectrum();
      for (int i = 0; i < 9; ++i) worst_rel = std::max(worst_rel, std::fabs(eig(i) - expected[i]) / expected[i]);
      const auto cond = p.block_condition_numbers();
      const double mx = *std::max_element(cond.begin(), cond.end());
      if (layout == HessianLayout::heterogeneous) {
        het_max = std::max(het_max, mx);
      } else {
        hom_min = std::min(hom_min, mx);
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(worst_rel <= 1e-8, "spectrum mismatch");
  o.require(het_max <= 3.1, "heterogeneous block condition number above 3.1");
  o.require(hom_min >= 1000.0, "homogeneous block condition number below 1000");
  o.require(elapsed < 1.0, "runtime above 1 s");
  if (o.pass) {
    o.detail = fmt("max rel eig err %.2e, het cond <= %.3f, hom cond >= %.1f, %.3f s", worst_rel, het_max,
                   hom_min, elapsed);
  }
  return o;
}

Outcome drift_identity() {
  Outcome o;
  const auto start = Clock::now();
  DriftReportConfig c;  // defaults: 5 x 3 x 3 grid, n = 1e6, z = 4
  const auto rows = drift_report(c);
  const double elapsed = seconds_since(start);
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const DriftRow& r) { return r.pass; });
  o.require(rows.size() == 45, "grid is not 45 cells");
  o.require(passed >= 43, "fewer than 43 cells within 4 SE");
  o.require(elapsed < 60.0, "runtime above 60 s");
  o.detail = o.pass ? fmt("%.0f/45 cells within 4 SE at n = 1e6, %.2f s", static_cast<double>(passed), elapsed)
                    : o.detail + fmt(" (%.0f/45 passed, %.2f s)", static_cast<double>(passed), elapsed);
  return o;
}

Outcome sqrt_batch_scaling() {
  Outcome o;
  Rng rng(2024);
  const VectorField grad = [](const ParamVector& x) { return x; };
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng.uniform_index(16);
    const long b = 1 + static_cast<long>(rng.uniform_index(1024));
    ParamVector sigma2(d);
    for (auto& s : sigma2) s = 0.05 + 4.0 * rng.uniform();
    const ParamVector g = random_vector(rng, d, std::exp(2.0 * rng.normal()));
    const ParamVector scaled_g = scaled(std::sqrt(static_cast<double>(b)), g);
    const auto at_b = signsgd_sde(grad, NoiseModel{sigma2, b}, 1e-3).drift(g);
    const auto at_1 = signsgd_sde(grad, NoiseModel{sigma2, 1}, 1e-3).drift(scaled_g);
    exact += at_b == at_1 ? 1 : 0;

    const auto sgd_ref = sgd_sde(grad, NoiseModel{sigma2, 1}, 1e-3).drift(g);
    o.require(sgd_sde(grad, NoiseModel{sigma2, b}, 1e-3).drift(g) == sgd_ref, "SGD drift depends on B");
  }
  o.require(exact == 100, "sqrt(B) identity not bitwise");
  if (o.pass) o.detail = "100/100 bitwise equal; SGD drift identical across B";
  return o;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const auto s = seed_stats(v);
  return {s.mean, s.stddev / std::sqrt(static_cast<double>(v.size()))};
}

Outcome noisy_isotropic_first_step() {
  Outcome o;
  const auto start = Clock::now();
  const double sigmas[4] = {0.0, 0.5, 1.0, 2.0};
  std::vector<MeanSe> sgd, sign;
  for (const char* file : {"isotropic_sgd.json", "isotropic_signsgd.json"}) {
    RunConfig base = parse_run_config(load_json_file(std::string(BATCHGAP_CONFIG_DIR) + "/" + file));
    for (double sigma : sigmas) {
      base.problem.isotropic.sigma = sigma;
      const auto problem = make_problem(base.problem);
      std::vector<double> decrease;
      for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        RunConfig c = base;
        c.seed = seed;
        const auto rec = run(c, *problem);
        decrease.push_back(rec.rows.front().loss - rec.rows.back().loss);
      }
      (base.optimizer.rule == OptimizerRule::sgd ? sgd : sign).push_back(mean_se(decrease));
    }
  }
  const double elapsed = seconds_since(start);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& m : sgd) {
    lo = std::min(lo, m.mean);
    hi = std::max(hi, m.mean);
  }
  const double spread = (hi - lo) / std::fabs(sgd[0].mean);
  o.require(spread < 0.05, "SGD first-step decrease varies by 5% or more");
  double min_z = INFINITY;
  for (int i = 0; i + 1 < 4; ++i) {
    const double z = (sign[i].mean - sign[i + 1].mean) / std::hypot(sign[i].se, sign[i + 1].se);
    min_z = std::min(min_z, std::isnan(z) ? INFINITY : z);
  }
  o.require(min_z >= 4.0, "SignSGD first-step decrease not strictly decreasing by 4 SE");
  o.require(elapsed < 30.0, "runtime above 30 s");
  o.detail += fmt(" SGD spread %.3f%%; SignSGD decrease %.4g > %.4g", 100 * spread, sign[0].mean, sign[1].mean) +
              fmt(" > %.4g > %.4g", sign[2].mean, sign[3].mean) + fmt(", min gap %.1f SE, %.2f s", min_z, elapsed);
  return o;
}

Outcome batch_size_benefit() {
  Outcome o;
  const auto start = Clock::now();
  SweepConfig c = parse_sweep_config(load_json_file(std::string(BATCHGAP_CONFIG_DIR) + "/batch_sweep.json"));
  const SweepResult res = sweep(c);
  const double elapsed = seconds_since(start);

  const auto het = res.problem_index("heterogeneous");
  const auto hom = res.problem_index("homogeneous");
  const auto sgd = res.optimizer_index("sgd");
  // Relative improvement r = 1 - mean(B=9)/mean(B=1); its spread propagates
  // the seed standard deviations of both means to first order.
  auto improvement = [&](std::size_t p, std::size_t opt, double& sigma) {
    const SweepCell& b1 = res.best(p, opt, 1);
    const SweepCell& b9 = res.best(p, opt, 9);
    const double q = b9.stats.mean / b1.stats.mean;
    sigma = q * std::hypot(b9.stats.stddev / b9.stats.mean, b1.stats.stddev / b1.stats.mean);
    return 1.0 - q;
  };
  double s_sgd = 0.0;
  const double r_sgd = improvement(het, sgd, s_sgd);
  std::ostringstream detail;
  detail << "r_sgd=" << fmt("%.4f+-%.4f", r_sgd, s_sgd);
  for (const char* name : {"adam", "signsgd"}) {
    double s = 0.0;
    const double r = improvement(het, res.optimizer_index(name), s);
    const double margin = (r - r_sgd) / std::hypot(s, s_sgd);
    detail << " r_" << name << "=" << fmt("%.4f+-%.4f (%.1f sigma)", r, s, margin);
    o.require(margin >= 2.0, std::string("improvement gap for ") + name + " below 2 sigma");
  }
  const auto adam = res.optimizer_index("adam");
  const double gap_het = res.best(het, sgd, 9).stats.mean - res.best(het, adam, 9).stats.mean;
  const double gap_hom = res.best(hom, sgd, 9).stats.mean - res.best(hom, adam, 9).stats.mean;
  detail << fmt("; Adam-SGD gap at B=9 het %.4g vs hom %.4g, %.1f s", gap_het, gap_hom, elapsed);
  o.require(gap_het > gap_hom, "heterogeneous gap not larger than homogeneous gap");
  o.require(elapsed < 300.0, "runtime above 5 min");
  o.detail = o.pass ? detail.str() : o.detail + " | " + detail.str();
  return o;
}

std::vector<std::pair<std::string, OptimizerSpec>> optimizer_zoo(double lr) {
  auto make = [&](OptimizerRule rule, double beta) {
    OptimizerSpec s;
    s.rule = rule;
    s.lr = lr;
    s.beta = beta;
    return s;
  };
  std::vector<std::pair<std::string, OptimizerSpec>> zoo{
      {"sgd", make(OptimizerRule::sgd, 0.9)},
      {"adam", make(OptimizerRule::adam, 0.0)},
      {"signsgd", make(OptimizerRule::signsgd, 0.0)},
      {"signed_momentum", make(OptimizerRule::signed_momentum, 0.9)},
      {"adaptive_clip", make(OptimizerRule::adaptive_clip, 0.9)},
  };
  OptimizerSpec clipped = make(OptimizerRule::sgd, 0.9);
  clipped.clip = 1.0;
  zoo.emplace_back("sgd_clipped", clipped);
  OptimizerSpec graft = make(OptimizerRule::graft, 0.0);
  graft.direction = std::make_shared<OptimizerSpec>(make(OptimizerRule::sgd, 0.9));
  graft.magnitude = std::make_shared<OptimizerSpec>(make(OptimizerRule::adam, 0.0));
  zoo.emplace_back("graft", graft);
  return zoo;
}

Outcome taylor_exactness() {
  Outcome o;
  double worst = 0.0;
  int checked = 0;
  for (auto layout : {HessianLayout::heterogeneous, HessianLayout::homogeneous}) {
    const auto problem = build_hessian(BlockQuadraticSpec::make_default(layout, 3));
    for (const auto& [name, spec] : optimizer_zoo(1e-3)) {
      auto opt = make_optimizer(spec, problem.dim());
      Rng rng(derive_seed(77, checked));
      ParamVector w = random_vector(rng, problem.dim());
      for (int t = 0; t < 100; ++t) {
        const ParamVector delta = opt->step(problem.stochastic_gradient(w, 3, rng));
        const StepDiagnostics s = diagnose_step(problem, w, delta);
        const double dloss = s.loss_after - s.loss_before;
        const double err = std::fabs(dloss - (s.grad_corr + s.dir_sharp)) / std::max(1.0, std::fabs(dloss));
        worst = std::max(worst, err);
        w += delta;
      }
      ++checked;
    }
  }
  o.require(worst <= 1e-10, "Taylor remainder above 1e-10");
  o.detail = fmt("%.0f optimizers x 2 layouts x 100 steps, worst scaled residual %.2e", checked / 2.0, worst);
  return o;
}

Outcome adaptive_clip_semantics() {
  Outcome o;
  const std::size_t d = 10000;
  Rng rng(99);
  int trials = 0;
  for (double p : {0.05, 0.1, 0.2}) {
    for (int t = 0; t < 5; ++t) {
      AdaptiveClipSgd opt(d, 1.0, 0.9, p);
      // A few steps so the buffer is a genuine momentum sum.
      ParamVector delta;
      for (int s = 0; s < 3; ++s) delta = opt.step(random_vector(rng, d, std::exp(rng.normal())));
      const ParamVector& m = opt.momentum();
      std::vector<double> mags;
      for (double x : m) mags.push_back(std::fabs(x));
      std::sort(mags.begin(), mags.end());
      const auto k = static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(d) - 1e-9));
      const double tau_oracle = mags[k - 1];
      const auto above_oracle = static_cast<std::size_t>(mags.end() - std::upper_bound(mags.begin(), mags.end(), tau_oracle));

      double post_max = 0.0;
      for (double x : delta) post_max = std::max(post_max, std::fabs(x));
      o.require(opt.last_threshold() == tau_oracle, "threshold differs from the sort oracle");
      o.require(post_max == tau_oracle, "post-clip max differs from tau");
      o.require(static_cast<double>(above_oracle) <= std::floor(p * static_cast<double>(d)),
                "more than floor(p d) coordinates above tau");
      const auto& report = opt.last_report();
      const double reported = clipped_fraction(*report.clip_source, report.clip_threshold).global;
      o.require(reported == static_cast<double>(above_oracle) / static_cast<double>(d),
                "metrics clipped fraction differs from the sort oracle");
      ++trials;
    }
  }
  if (o.pass) o.detail = fmt("%.0f buffers at d = 1e4, p in {0.05, 0.1, 0.2}", trials);
  return o;
}

Outcome grafting_contracts() {
  Outcome o;
  double worst_norm = 0.0, worst_cos = 0.0, worst_self = 0.0;
  const auto zoo = optimizer_zoo(1e-2);
  OptimizerSpec sgd = zoo[0].second, adam = zoo[1].second;
  for (int stream = 0; stream < 100; ++stream) {
    Rng rng(derive_seed(5, stream));
    const std::size_t d = 2 + rng.uniform_index(30);
    std::vector<ParamVector> grads;
    for (int t = 0; t < 20; ++t) grads.push_back(random_vector(rng, d, std::exp(rng.normal())));

    for (int order = 0; order < 2; ++order) {
      OptimizerSpec g;
      g.rule = OptimizerRule::graft;
      g.lr = 1e-2;
      g.direction = std::make_shared<OptimizerSpec>(order == 0 ? sgd : adam);
      g.magnitude = std::make_shared<OptimizerSpec>(order == 0 ? adam : sgd);
      auto opt = make_optimizer(g, d);
      const auto& graft = dynamic_cast<const Graft&>(*opt);
      for (const auto& grad : grads) {
        const ParamVector delta = opt->step(grad);
        const double mnorm = norm2(graft.last_magnitude_update());
        const ParamVector& dir = graft.last_direction_update();
        worst_norm = std::max(worst_norm, std::fabs(norm2(delta) - mnorm) / std::max(1.0, mnorm));
        worst_cos = std::max(worst_cos, 1.0 - dot(delta, dir) / (norm2(delta) * norm2(dir)));
      }
    }

    const auto& [name, base_spec] = zoo[stream % zoo.size()];
    if (base_spec.rule == OptimizerRule::graft) continue;
    OptimizerSpec self;
    self.rule = OptimizerRule::graft;
    self.lr = base_spec.lr;
    self.direction = std::make_shared<OptimizerSpec>(base_spec);
    self.magnitude = std::make_shared<OptimizerSpec>(base_spec);
    auto a = make_optimizer(self, d);
    auto b = make_optimizer(base_spec, d);
    for (const auto& grad : grads) {
      const ParamVector x = a->step(grad), y = b->step(grad);
      worst_self = std::max(worst_self, norm2(x - y) / std::max(norm2(y), 1e-300));
    }
  }
  o.require(worst_norm <= 1e-12, "grafted norm differs from magnitude norm");
  o.require(worst_cos <= 1e-12, "grafted update not parallel to direction update");
  o.require(worst_self <= 1e-12, "self graft differs from base optimizer");
  o.detail += fmt(" norm err %.1e, 1-cos %.1e, self-graft rel err %.1e", worst_norm, worst_cos, worst_self);
  return o;
}

Outcome sde_integrator() {
  Outcome o;
  const VectorField grad = [](const ParamVector& x) { return x; };
  const ParamVector x0{1.5, -0.5, 2.0};
  const double dt = 1e-3;
  const long steps = 1000;

  const auto ou = sgd_sde(grad, NoiseModel::isotropic(3, 1.0, 1), dt);
  const int paths = 1000;
  std::vector<std::vector<double>> finals(3);
  for (int p = 0; p < paths; ++p) {
    Rng rng(derive_seed(31, p));
    const auto path = euler_maruyama(ou, x0, steps, rng);
    for (std::size_t i = 0; i < 3; ++i) finals[i].push_back(path.back()[i]);
  }
  double worst_z = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto m = mean_se(finals[i]);
    worst_z = std::max(worst_z, std::fabs(m.mean - x0[i] * std::exp(-1.0)) / m.se);
  }
  o.require(worst_z <= 4.0, "OU mean outside 4 SE");

  const auto flow = sgd_sde(grad, NoiseModel::isotropic(3, 0.0, 1), dt);
  Rng rng(0);
  const auto path = euler_maruyama(flow, x0, steps, rng);
  double worst_rel = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = x0[i] * std::exp(-1.0);
    worst_rel = std::max(worst_rel, std::fabs(path.back()[i] - exact) / std::fabs(exact));
  }
  o.require(worst_rel <= 1e-3, "noiseless drift off the exponential by more than 1e-3");
  o.detail += fmt(" OU worst |z| = %.2f over 1e3 paths; noiseless rel err %.2e", worst_z, worst_rel);
  return o;
}

Outcome determinism() {
  Outcome o;
  int configs = 0;
  for (const char* file : {"run_adaptive_clip.json", "run_graft.json", "isotropic_signsgd.json"}) {
    const RunConfig c = parse_run_config(load_json_file(std::string(BATCHGAP_CONFIG_DIR) + "/" + file));
    o.require(to_csv(run(c)) == to_csv(run(c)), std::string("CSV differs for ") + file);
    ++configs;
  }
  for (const auto& [name, spec] : optimizer_zoo(1e-3)) {
    RunConfig c;
    c.optimizer = spec;
    c.steps = 300;
    c.batch_size = 2;
    c.seed = 4;
    c.problem.init.kind = InitKind::gaussian;
    c.schedule.kind = ScheduleKind::cosine_warmup;
    c.schedule.warmup_steps = 30;
    o.require(to_csv(run(c)) == to_csv(run(c)), "CSV differs for " + name);
    ++configs;
  }
  if (o.pass) o.detail = fmt("%.0f configs byte-identical across repeated runs", configs);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {"C1  Hessian construction", hessian_construction},
      {"C2  sign-expectation drift identity", drift_identity},
      {"C3  sqrt(B) drift scaling", sqrt_batch_scaling},
      {"C4  noisy isotropic first step", noisy_isotropic_first_step},
      {"C5  batch-size benefit by optimizer", batch_size_benefit},
      {"C6  second-order Taylor exactness", taylor_exactness},
      {"C7  adaptive momentum clipping", adaptive_clip_semantics},
      {"C8  grafting contracts", grafting_contracts},
      {"C9  SDE integrator", sde_integrator},
      {"C10 determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failures += out.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
