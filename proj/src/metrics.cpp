#include "batchgap/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "batchgap/simd/kernels.hpp"

namespace batchgap {

double gradient_correlation(const ParamVector& grad, const ParamVector& delta) {
  return dot(grad, delta);
}

double directional_sharpness(const ParamVector& delta, const HessianVectorOracle& hvp) {
  return 0.5 * dot(delta, hvp(delta));
}

ClippedFraction clipped_fraction(const ParamVector& values, double threshold,
                                 const std::optional<BlockPartition>& blocks) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clipped_fraction: threshold must be > 0");
  if (values.empty()) throw std::invalid_argument("clipped_fraction: empty vector");
  const auto& k = simd::active();
  ClippedFraction out;
  out.global = static_cast<double>(k.count_above(values.data(), threshold, values.size())) /
               static_cast<double>(values.size());
  if (blocks) {
    validate_partition(*blocks, values.size());
    out.per_block.reserve(blocks->size());
    for (const auto& block : *blocks) {
      std::size_t count = 0;
      for (std::size_t i : block) count += std::fabs(values[i]) > threshold ? 1 : 0;
      out.per_block.push_back(static_cast<double>(count) / static_cast<double>(block.size()));
    }
  }
  return out;
}

StepDiagnostics diagnose_step(const Problem& problem, const ParamVector& w,
                              const ParamVector& delta) {
  StepDiagnostics d;
  d.grad_corr = gradient_correlation(problem.gradient(w), delta);
  d.dir_sharp = directional_sharpness(
      delta, [&](const ParamVector& v) { return problem.hessian_vector(w, v); });
  d.second_order_change = d.grad_corr + d.dir_sharp;
  d.loss_before = problem.loss(w);
  d.loss_after = problem.loss(w + delta);
  return d;
}

}  // namespace batchgap
