#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "batchgap/harness/config.hpp"

namespace batchgap::harness {

// Loss above this (or non-finite) ends a run as diverged.
inline constexpr double kDivergenceLoss = 1e12;

// One logged step. Row k describes the state before update k and the update
// taken there; the final row holds only the state after the last update.
struct RunRow {
  long step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::optional<double> grad_norm_pre_clip;
  std::optional<double> grad_norm_post_clip;
  std::optional<double> grad_corr;
  std::optional<double> dir_sharp;
  std::optional<double> clipped_frac_global;
  std::vector<double> clipped_frac_block;
};

struct RunRecord {
  std::vector<RunRow> rows;
  std::size_t n_blocks = 0;
  double final_loss = 0.0;
  std::optional<long> diverged_at;
  double wall_seconds = 0.0;

  bool diverged() const { return diverged_at.has_value(); }
};

// Executes the config: sample batch, stochastic gradient, optimizer step,
// apply, log. Bitwise deterministic for a given config. The problem is built
// from the config unless one is supplied.
RunRecord run(const RunConfig& config);
RunRecord run(const RunConfig& config, const Problem& problem);

// Column order: step, lr, loss, grad_norm_pre_clip, grad_norm_post_clip,
// grad_corr, dir_sharp, clipped_frac_global, clipped_frac_block_0, ...
std::string csv_header(std::size_t n_blocks);
void write_csv(const RunRecord& record, std::ostream& out);
std::string to_csv(const RunRecord& record);

}  // namespace batchgap::harness
