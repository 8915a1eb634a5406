#pragma once
// Analytically tractable test problems: block-diagonal quadratics whose
// Hessian blocks either group eigenvalues of similar magnitude
// (heterogeneous) or mix magnitudes inside each block (homogeneous), and the
// isotropic quadratic with injected Gaussian gradient noise.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "batchgap/core/param_vector.hpp"
#include "batchgap/core/rng.hpp"
#include "batchgap/core/symmetric_matrix.hpp"

namespace batchgap {

enum class HessianLayout { heterogeneous, homogeneous };

std::string_view to_string(HessianLayout layout);
HessianLayout parse_layout(std::string_view name);

// Index sets of the parameter blocks (stand-ins for network layers).
using BlockPartition = std::vector<std::vector<std::size_t>>;

// Checks that every block is nonempty and the blocks partition {0..dim-1}.
void validate_partition(const BlockPartition& blocks, std::size_t dim);

struct BlockQuadraticSpec {
  std::vector<std::vector<double>> eigenvalue_blocks;
  HessianLayout layout = HessianLayout::heterogeneous;
  std::uint64_t rotation_seed = 0;
  // Test hook: skip the random rotations, leaving H diagonal.
  bool identity_rotations = false;

  // Eigenvalues {1,2,3,99,100,101,4998,4999,5000}. Heterogeneous keeps
  // similar magnitudes per 3x3 block; homogeneous puts {k, 98+k, 4997+k} in
  // block k.
  static BlockQuadraticSpec make_default(HessianLayout layout, std::uint64_t rotation_seed = 0);

  std::size_t dim() const;
  void validate() const;
};

struct NoisyIsotropicSpec {
  std::size_t dim = 100;
  double sigma = 0.0;  // per-coordinate noise standard deviation at batch size 1

  void validate() const;
};

// Differentiable objective with an unbiased stochastic gradient oracle.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t dim() const = 0;
  virtual double loss(const ParamVector& w) const = 0;
  virtual ParamVector gradient(const ParamVector& w) const = 0;
  virtual ParamVector hessian_vector(const ParamVector& w, const ParamVector& v) const = 0;
  virtual ParamVector stochastic_gradient(const ParamVector& w, std::size_t batch_size,
                                          Rng& rng) const = 0;
  virtual BlockPartition blocks() const = 0;
};

// L(w) = 1/2 w^T H w with design matrix X = H^(1/2); a minibatch is a
// multiset of rows of X drawn uniformly with replacement.
class BlockQuadraticProblem final : public Problem {
 public:
  BlockQuadraticProblem(SymmetricMatrix hessian, BlockPartition blocks);

  const SymmetricMatrix& hessian() const { return hessian_; }
  const SymmetricMatrix& design() const { return design_; }
  std::size_t n_rows() const { return design_.dim(); }

  std::size_t dim() const override { return hessian_.dim(); }
  double loss(const ParamVector& w) const override;
  ParamVector gradient(const ParamVector& w) const override;
  ParamVector hessian_vector(const ParamVector& w, const ParamVector& v) const override;
  ParamVector stochastic_gradient(const ParamVector& w, std::size_t batch_size,
                                  Rng& rng) const override;
  BlockPartition blocks() const override { return blocks_; }

  std::vector<std::size_t> sample_batch(std::size_t batch_size, Rng& rng) const;
  // (n / B) * sum_{i in batch} (x_i^T w) x_i
  ParamVector minibatch_gradient(const ParamVector& w, std::span<const std::size_t> batch) const;

  Eigen::VectorXd spectrum() const;
  // lambda_max / lambda_min of each diagonal block of H.
  std::vector<double> block_condition_numbers() const;

 private:
  SymmetricMatrix hessian_;
  SymmetricMatrix design_;
  BlockPartition blocks_;
};

// f(x) = 1/2 ||x||^2 with gradient x + (sigma / sqrt(B)) z, z ~ N(0, I).
class NoisyIsotropicProblem final : public Problem {
 public:
  explicit NoisyIsotropicProblem(NoisyIsotropicSpec spec);

  const NoisyIsotropicSpec& spec() const { return spec_; }

  std::size_t dim() const override { return spec_.dim; }
  double loss(const ParamVector& w) const override;
  ParamVector gradient(const ParamVector& w) const override;
  ParamVector hessian_vector(const ParamVector& w, const ParamVector& v) const override;
  ParamVector stochastic_gradient(const ParamVector& w, std::size_t batch_size,
                                  Rng& rng) const override;
  BlockPartition blocks() const override;

 private:
  NoisyIsotropicSpec spec_;
};

// Orthogonal n x n matrix: eigenvectors of A A^T for Gaussian A, columns
// sign-normalized (first nonzero entry positive). Resamples when A A^T has a
// numerically repeated eigenvalue.
Eigen::MatrixXd haar_block_rotation(Rng& rng, std::size_t n);

// Block-diagonal H with one independently rotated block per eigenvalue block.
// Throws std::invalid_argument on a non-positive eigenvalue.
BlockQuadraticProblem build_hessian(const BlockQuadraticSpec& spec);

// x + sigma * z, z ~ N(0, I): noisy gradient of 1/2 ||x||^2.
ParamVector noisy_gradient(const ParamVector& x, const NoisyIsotropicSpec& spec, Rng& rng);

using GradientFn = std::function<ParamVector(const ParamVector&)>;

// (grad(x + eps v) - grad(x - eps v)) / (2 eps) with
// eps = sqrt(machine eps) * (1 + ||x||) / max(||v||, 1e-30). Zero v gives zero.
ParamVector finite_difference_hvp(const GradientFn& grad, const ParamVector& x,
                                  const ParamVector& v);

}  // namespace batchgap
