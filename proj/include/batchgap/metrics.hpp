#pragma once
// Per-step diagnostics from the second-order expansion
//   f(x + d) ~ f(x) + grad f(x)^T d + 1/2 d^T H d
// ("gradient correlation" + "directional sharpness"), and clipping counts.

#include <functional>
#include <optional>
#include <vector>

#include "batchgap/core/param_vector.hpp"
#include "batchgap/problems.hpp"

namespace batchgap {

using HessianVectorOracle = std::function<ParamVector(const ParamVector&)>;

struct ClippedFraction {
  double global = 0.0;
  std::vector<double> per_block;
};

struct StepDiagnostics {
  double grad_corr = 0.0;
  double dir_sharp = 0.0;
  double second_order_change = 0.0;  // grad_corr + dir_sharp
  double loss_before = 0.0;
  double loss_after = 0.0;
  double clipped_fraction_global = 0.0;
  std::vector<double> clipped_fraction_per_block;
};

// grad^T delta
double gradient_correlation(const ParamVector& grad, const ParamVector& delta);
// 1/2 delta^T (H delta)
double directional_sharpness(const ParamVector& delta, const HessianVectorOracle& hvp);

// Fraction of entries with |v_i| > threshold, globally and per block. Without
// a partition the per-block list is empty.
ClippedFraction clipped_fraction(const ParamVector& values, double threshold,
                                 const std::optional<BlockPartition>& blocks = std::nullopt);

// Gradient correlation and sharpness of the applied update `delta` at `w`,
// using the exact gradient and Hessian-vector product of `problem`.
StepDiagnostics diagnose_step(const Problem& problem, const ParamVector& w,
                              const ParamVector& delta);

}  // namespace batchgap
