#include "batchgap/harness/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "batchgap/harness/csv.hpp"

namespace batchgap::harness {

SeedStats seed_stats(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("seed_stats: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  SeedStats s;
  const auto n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string_view to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::lowest_mean:
      return "lowest_mean";
    case SelectionRule::largest_stable:
      return "largest_stable";
    case SelectionRule::diverged:
      return "diverged";
  }
  return "unknown";
}

Selection select_learning_rate(const std::vector<const SweepCell*>& candidates,
                               const std::vector<std::size_t>& cell_indices) {
  Selection sel;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const SweepCell& c = *candidates[i];
    if (!c.all_stable()) continue;
    if (!best || c.stats.mean < candidates[*best]->stats.mean) best = i;
  }
  if (best) {
    sel.rule = SelectionRule::lowest_mean;
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const SweepCell& c = *candidates[i];
      if (c.median_stable() && (!best || c.lr > candidates[*best]->lr)) best = i;
    }
    sel.rule = best ? SelectionRule::largest_stable : SelectionRule::diverged;
  }
  if (best) sel.cell = cell_indices[*best];
  return sel;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

const Selection& SweepResult::selection(std::size_t problem, std::size_t optimizer,
                                        long batch_size) const {
  for (const Selection& s : selections) {
    if (s.problem == problem && s.optimizer == optimizer && s.batch_size == batch_size) return s;
  }
  throw std::out_of_range("no selection for the requested sweep cell");
}

const SweepCell& SweepResult::best(std::size_t problem, std::size_t optimizer,
                                   long batch_size) const {
  const Selection& s = selection(problem, optimizer, batch_size);
  if (!s.cell) throw std::runtime_error("every learning rate diverged for the requested cell");
  return cells[*s.cell];
}

std::size_t SweepResult::problem_index(const std::string& name) const {
  for (std::size_t i = 0; i < problem_names.size(); ++i) {
    if (problem_names[i] == name) return i;
  }
  throw std::out_of_range("unknown sweep problem: " + name);
}

std::size_t SweepResult::optimizer_index(const std::string& name) const {
  for (std::size_t i = 0; i < optimizer_names.size(); ++i) {
    if (optimizer_names[i] == name) return i;
  }
  throw std::out_of_range("unknown sweep optimizer: " + name);
}

bool SweepResult::all_diverged() const {
  for (const Selection& s : selections) {
    if (s.rule != SelectionRule::diverged) return false;
  }
  return true;
}

SweepResult sweep(const SweepConfig& config, const RunSink& sink) {
  config.validate();
  SweepResult result;
  for (const auto& p : config.problems) result.problem_names.push_back(p.name);
  for (const auto& o : config.optimizers) result.optimizer_names.push_back(o.name);
  result.batch_sizes = config.batch_sizes;
  result.seeds = config.seeds;

  std::vector<std::unique_ptr<Problem>> problems;
  for (const auto& p : config.problems) problems.push_back(make_problem(p.spec));

  for (std::size_t p = 0; p < config.problems.size(); ++p) {
    for (std::size_t o = 0; o < config.optimizers.size(); ++o) {
      for (long b : config.batch_sizes) {
        const auto& lrs = config.optimizers[o].learning_rates;
        for (std::size_t l = 0; l < lrs.size(); ++l) {
          SweepCell cell;
          cell.problem = p;
          cell.optimizer = o;
          cell.batch_size = b;
          cell.lr_index = l;
          cell.lr = lrs[l];
          result.cells.push_back(std::move(cell));
        }
      }
    }
  }

  const std::size_t n_seeds = config.seeds.size();
  auto make_config = [&](const SweepCell& cell, std::size_t s) {
    RunConfig rc = config.base;
    rc.problem = config.problems[cell.problem].spec;
    rc.optimizer = config.optimizers[cell.optimizer].spec;
    rc.optimizer.lr = cell.lr;
    rc.batch_size = cell.batch_size;
    rc.seed = config.seeds[s];
    return rc;
  };

  std::vector<RunRecord> records(result.cells.size() * n_seeds);
  parallel_for(records.size(), config.workers, [&](std::size_t job) {
    const SweepCell& cell = result.cells[job / n_seeds];
    records[job] = run(make_config(cell, job % n_seeds), *problems[cell.problem]);
  });

  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    SweepCell& cell = result.cells[c];
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const RunRecord& rec = records[c * n_seeds + s];
      cell.final_losses.push_back(rec.diverged() ? INFINITY : rec.final_loss);
      cell.diverged.push_back(rec.diverged() ? 1 : 0);
      cell.n_diverged += rec.diverged() ? 1 : 0;
      if (sink) sink(cell, s, make_config(cell, s), rec);
    }
    cell.stats = seed_stats(cell.final_losses);
  }

  for (std::size_t p = 0; p < config.problems.size(); ++p) {
    for (std::size_t o = 0; o < config.optimizers.size(); ++o) {
      for (long b : config.batch_sizes) {
        std::vector<const SweepCell*> candidates;
        std::vector<std::size_t> indices;
        for (std::size_t c = 0; c < result.cells.size(); ++c) {
          const SweepCell& cell = result.cells[c];
          if (cell.problem == p && cell.optimizer == o && cell.batch_size == b) {
            candidates.push_back(&cell);
            indices.push_back(c);
          }
        }
        Selection sel = select_learning_rate(candidates, indices);
        sel.problem = p;
        sel.optimizer = o;
        sel.batch_size = b;
        result.selections.push_back(sel);
      }
    }
  }
  return result;
}

namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json to_json(const SweepResult& result) {
  Json j;
  j["problems"] = result.problem_names;
  j["optimizers"] = result.optimizer_names;
  j["batch_sizes"] = result.batch_sizes;
  j["seeds"] = result.seeds;
  Json cells = Json::array();
  for (const SweepCell& c : result.cells) {
    Json losses = Json::array();
    for (double v : c.final_losses) losses.push_back(number_or_null(v));
    cells.push_back({{"problem", result.problem_names[c.problem]},
                     {"optimizer", result.optimizer_names[c.optimizer]},
                     {"batch_size", c.batch_size},
                     {"lr", c.lr},
                     {"final_losses", losses},
                     {"n_diverged", c.n_diverged},
                     {"mean_final_loss", number_or_null(c.stats.mean)},
                     {"std_final_loss", number_or_null(c.stats.stddev)}});
  }
  j["cells"] = cells;
  Json selections = Json::array();
  for (const Selection& s : result.selections) {
    Json entry = {{"problem", result.problem_names[s.problem]},
                  {"optimizer", result.optimizer_names[s.optimizer]},
                  {"batch_size", s.batch_size},
                  {"rule", std::string(to_string(s.rule))}};
    if (s.cell) {
      const SweepCell& c = result.cells[*s.cell];
      entry["lr"] = c.lr;
      entry["mean_final_loss"] = number_or_null(c.stats.mean);
      entry["std_final_loss"] = number_or_null(c.stats.stddev);
    }
    selections.push_back(entry);
  }
  j["selections"] = selections;
  return j;
}

SweepResult sweep_to_directory(const SweepConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "runs");
  SweepResult result = sweep(config, [&](const SweepCell& cell, std::size_t s, const RunConfig&,
                                         const RunRecord& record) {
    if (!config.write_runs) return;
    const std::string name = config.problems[cell.problem].name + "__" +
                             config.optimizers[cell.optimizer].name + "__B" +
                             std::to_string(cell.batch_size) + "__lr" +
                             std::to_string(cell.lr_index) + "__seed" +
                             std::to_string(config.seeds[s]) + ".csv";
    std::ofstream out(out_dir / "runs" / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "runs" / name).string());
    write_csv(record, out);
  });
  std::ofstream summary(out_dir / "summary.json", std::ios::binary);
  if (!summary) throw std::runtime_error("cannot write " + (out_dir / "summary.json").string());
  summary << to_json(result).dump(2) << '\n';
  return result;
}

}  // namespace batchgap::harness
