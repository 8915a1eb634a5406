// Command-line front end: every subcommand reads a JSON config and writes its
// results into an output directory.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config or usage,
// 3 sweep in which every (problem, optimizer, batch size) diverged.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "batchgap/harness/config.hpp"
#include "batchgap/harness/csv.hpp"
#include "batchgap/harness/drift_report.hpp"
#include "batchgap/harness/run.hpp"
#include "batchgap/harness/sde_sim.hpp"
#include "batchgap/harness/sweep.hpp"
#include "batchgap/simd/kernels.hpp"

namespace fs = std::filesystem;
using namespace batchgap;
using namespace batchgap::harness;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int cmd_build_problem(const std::string& config_path, const fs::path& out_dir) {
  Json j = load_json_file(config_path);
  if (j.contains("problem")) j = j.at("problem");
  const ProblemSpec spec = parse_problem(j);
  if (spec.kind != ProblemKind::block_quadratic) {
    throw ConfigError("build-problem expects a block_quadratic problem");
  }
  const BlockQuadraticProblem problem = build_hessian(spec.quadratic);
  fs::create_directories(out_dir);

  auto write_matrix = [&](const fs::path& path, const SymmetricMatrix& m) {
    auto out = open_output(path);
    for (std::size_t i = 0; i < m.dim(); ++i) {
      for (std::size_t k = 0; k < m.dim(); ++k) out << (k ? "," : "") << format_number(m(i, k));
      out << '\n';
    }
  };
  write_matrix(out_dir / "hessian.csv", problem.hessian());
  write_matrix(out_dir / "design.csv", problem.design());

  const Eigen::VectorXd spectrum = problem.spectrum();
  auto spec_out = open_output(out_dir / "spectrum.csv");
  spec_out << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    spec_out << i << ',' << format_number(spectrum(i)) << '\n';
  }

  Json summary = to_json(spec);
  summary["spectrum"] = std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size());
  summary["block_condition_numbers"] = problem.block_condition_numbers();
  summary["blocks"] = problem.blocks();
  open_output(out_dir / "problem.json") << summary.dump(2) << '\n';
  std::cout << "wrote " << (out_dir / "problem.json").string() << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir) {
  const RunConfig config = parse_run_config(load_json_file(config_path));
  const RunRecord record = run(config);
  fs::create_directories(out_dir);
  auto csv = open_output(out_dir / "run.csv");
  write_csv(record, csv);
  open_output(out_dir / "config.json") << to_json(config).dump(2) << '\n';
  std::cout << "final loss " << format_number(record.final_loss);
  if (record.diverged()) std::cout << " (diverged at step " << *record.diverged_at << ")";
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir) {
  const SweepConfig config = parse_sweep_config(load_json_file(config_path));
  const SweepResult result = sweep_to_directory(config, out_dir);
  for (const Selection& s : result.selections) {
    std::cout << result.problem_names[s.problem] << ' ' << result.optimizer_names[s.optimizer]
              << " B=" << s.batch_size << ' ' << to_string(s.rule);
    if (s.cell) {
      const SweepCell& c = result.cells[*s.cell];
      std::cout << " lr=" << format_number(c.lr) << " mean=" << format_number(c.stats.mean)
                << " std=" << format_number(c.stats.stddev);
    }
    std::cout << '\n';
  }
  if (result.all_diverged()) {
    std::cerr << "every sweep cell diverged\n";
    return 3;
  }
  return 0;
}

int cmd_sde_sim(const std::string& config_path, const fs::path& out_dir) {
  const SdeSimConfig config = parse_sde_config(load_json_file(config_path));
  const SdeSimResult result = simulate_sde(config);
  write_sde_outputs(config, result, out_dir);
  std::cout << "final mean loss " << format_number(result.mean_loss.back()) << " +- "
            << format_number(result.se_loss.back()) << '\n';
  return 0;
}

int cmd_drift_report(const std::string& config_path, const fs::path& out_dir) {
  const DriftReportConfig config = parse_drift_config(load_json_file(config_path));
  const auto rows = drift_report(config);
  fs::create_directories(out_dir);
  auto out = open_output(out_dir / "drift_report.csv");
  write_drift_csv(rows, out);
  std::size_t passed = 0;
  for (const auto& r : rows) passed += r.pass ? 1 : 0;
  std::cout << passed << '/' << rows.size() << " cells within " << config.z_threshold
            << " standard errors\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimizer batch-size dynamics on tractable problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int (*handler)(const std::string&, const fs::path&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const std::string&, const fs::path&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("build-problem", "build a block quadratic and emit H, X and its spectrum", cmd_build_problem);
  add("run", "execute one run and write run.csv", cmd_run);
  add("sweep", "run a batch size x lr x optimizer x seed grid", cmd_sweep);
  add("sde-sim", "simulate the SGD or SignSGD diffusion model", cmd_sde_sim);
  add("drift-report", "Monte Carlo check of the sign-expectation identity", cmd_drift_report);
  app.add_subcommand("info", "print the active SIMD kernel set")->callback([] {
    std::cout << "simd: " << simd::isa_name(simd::active().isa) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (handler == nullptr) return 0;
  try {
    return handler(config_path, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
