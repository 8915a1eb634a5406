#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "batchgap/harness/config.hpp"
#include "batchgap/harness/run.hpp"

namespace batchgap::harness {

struct SeedStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
};

// Mean and sample standard deviation; a single value has stddev 0.
SeedStats seed_stats(const std::vector<double>& values);

// One (problem, optimizer, batch size, lr) cell across all seeds.
struct SweepCell {
  std::size_t problem = 0;
  std::size_t optimizer = 0;
  long batch_size = 0;
  std::size_t lr_index = 0;
  double lr = 0.0;
  std::vector<double> final_losses;  // one per seed, in seed order; inf when diverged
  std::vector<char> diverged;
  SeedStats stats;
  std::size_t n_diverged = 0;

  bool all_stable() const { return n_diverged == 0; }
  // Median run finished without diverging.
  bool median_stable() const { return 2 * n_diverged < final_losses.size(); }
};

enum class SelectionRule { lowest_mean, largest_stable, diverged };

std::string_view to_string(SelectionRule rule);

// Learning-rate choice for one (problem, optimizer, batch size).
struct Selection {
  std::size_t problem = 0;
  std::size_t optimizer = 0;
  long batch_size = 0;
  SelectionRule rule = SelectionRule::diverged;
  std::optional<std::size_t> cell;  // index into SweepResult::cells
};

struct SweepResult {
  std::vector<std::string> problem_names;
  std::vector<std::string> optimizer_names;
  std::vector<long> batch_sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepCell> cells;
  std::vector<Selection> selections;

  const Selection& selection(std::size_t problem, std::size_t optimizer, long batch_size) const;
  const SweepCell& best(std::size_t problem, std::size_t optimizer, long batch_size) const;
  std::size_t problem_index(const std::string& name) const;
  std::size_t optimizer_index(const std::string& name) const;
  bool all_diverged() const;
};

// Among learning rates whose runs all stayed finite, pick the lowest mean
// final loss. If none qualifies, fall back to the largest learning rate whose
// median run stayed finite; otherwise the selection is marked diverged.
Selection select_learning_rate(const std::vector<const SweepCell*>& candidates,
                               const std::vector<std::size_t>& cell_indices);

using RunSink = std::function<void(const SweepCell& cell, std::size_t seed_index,
                                   const RunConfig& config, const RunRecord& record)>;

// Runs every (problem, optimizer, batch, lr, seed) combination, concurrently
// across runs. Aggregation folds results by grid index, never completion
// order. `sink`, if given, sees every finished run on the calling thread in
// grid order.
SweepResult sweep(const SweepConfig& config, const RunSink& sink = nullptr);

// Runs the sweep and persists one CSV per run under out_dir/runs plus
// out_dir/summary.json.
SweepResult sweep_to_directory(const SweepConfig& config, const std::filesystem::path& out_dir);

Json to_json(const SweepResult& result);

// Calls fn(i) for i in [0, n) on up to `workers` threads (0: hardware).
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace batchgap::harness
