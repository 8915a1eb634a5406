#include "batchgap/harness/run.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "batchgap/harness/csv.hpp"
#include "batchgap/metrics.hpp"

namespace batchgap::harness {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;

bool is_divergent(double loss) { return !std::isfinite(loss) || loss > kDivergenceLoss; }

void fill_clipping(RunRow& row, const StepReport& report, const BlockPartition& blocks) {
  if (report.clip_source) {
    const ClippedFraction f = clipped_fraction(*report.clip_source, report.clip_threshold, blocks);
    row.clipped_frac_global = f.global;
    row.clipped_frac_block = f.per_block;
    return;
  }
  // Norm clipping rescales every coordinate at once.
  const double value = report.norm_clipped ? 1.0 : 0.0;
  row.clipped_frac_global = value;
  row.clipped_frac_block.assign(blocks.size(), value);
}

}  // namespace

RunRecord run(const RunConfig& config) {
  config.validate();
  const auto problem = make_problem(config.problem);
  return run(config, *problem);
}

RunRecord run(const RunConfig& config, const Problem& problem) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const ScheduleSpec schedule = config.effective_schedule();
  const BlockPartition blocks = config.problem.partition.value_or(problem.blocks());
  validate_partition(blocks, problem.dim());

  const Rng root(config.seed);
  Rng init_rng = root.split(kInitStream);
  Rng batch_rng = root.split(kBatchStream);

  RunRecord record;
  record.n_blocks = blocks.size();
  ParamVector w = initial_point(config.problem.init, problem.dim(), init_rng);
  auto optimizer = make_optimizer(config.optimizer, problem.dim());
  const auto batch = static_cast<std::size_t>(config.batch_size);

  double loss = problem.loss(w);
  long step = 0;
  for (; step < config.steps; ++step) {
    const double lr = lr_at(schedule, step);
    optimizer->set_lr(lr);
    const ParamVector g = problem.stochastic_gradient(w, batch, batch_rng);
    const ParamVector delta = optimizer->step(g);

    if (step % config.log_every == 0) {
      RunRow row;
      row.step = step;
      row.lr = lr;
      row.loss = loss;
      const StepReport& report = optimizer->last_report();
      row.grad_norm_pre_clip = report.grad_norm_pre_clip;
      row.grad_norm_post_clip = report.grad_norm_post_clip;
      if (config.metrics.diagnostics) {
        row.grad_corr = gradient_correlation(problem.gradient(w), delta);
        row.dir_sharp = directional_sharpness(
            delta, [&](const ParamVector& v) { return problem.hessian_vector(w, v); });
      }
      if (config.metrics.clipping) fill_clipping(row, report, blocks);
      record.rows.push_back(std::move(row));
    }

    w += delta;
    loss = problem.loss(w);
    if (is_divergent(loss)) {
      record.diverged_at = step + 1;
      ++step;
      break;
    }
  }

  RunRow last;
  last.step = step;
  last.lr = lr_at(schedule, step);
  last.loss = loss;
  record.rows.push_back(std::move(last));
  record.final_loss = std::isnan(loss) ? INFINITY : loss;
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::string csv_header(std::size_t n_blocks) {
  std::string header =
      "step,lr,loss,grad_norm_pre_clip,grad_norm_post_clip,grad_corr,dir_sharp,clipped_frac_global";
  for (std::size_t k = 0; k < n_blocks; ++k) header += ",clipped_frac_block_" + std::to_string(k);
  return header;
}

void write_csv(const RunRecord& record, std::ostream& out) {
  out << csv_header(record.n_blocks) << '\n';
  for (const RunRow& row : record.rows) {
    out << row.step << ',' << format_number(row.lr) << ',' << format_number(row.loss) << ','
        << format_optional(row.grad_norm_pre_clip) << ','
        << format_optional(row.grad_norm_post_clip) << ',' << format_optional(row.grad_corr)
        << ',' << format_optional(row.dir_sharp) << ','
        << format_optional(row.clipped_frac_global);
    for (std::size_t k = 0; k < record.n_blocks; ++k) {
      out << ',';
      if (k < row.clipped_frac_block.size()) out << format_number(row.clipped_frac_block[k]);
    }
    out << '\n';
  }
}

std::string to_csv(const RunRecord& record) {
  std::ostringstream out;
  write_csv(record, out);
  return out.str();
}

}  // namespace batchgap::harness
