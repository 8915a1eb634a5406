#include "batchgap/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "batchgap/simd/kernels.hpp"

namespace batchgap {

std::string_view to_string(HessianLayout layout) {
  return layout == HessianLayout::heterogeneous ? "heterogeneous" : "homogeneous";
}

HessianLayout parse_layout(std::string_view name) {
  if (name == "heterogeneous" || name == "het") return HessianLayout::heterogeneous;
  if (name == "homogeneous" || name == "hom") return HessianLayout::homogeneous;
  throw std::invalid_argument("unknown Hessian layout: " + std::string(name));
}

void validate_partition(const BlockPartition& blocks, std::size_t dim) {
  std::vector<int> seen(dim, 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("block partition contains an empty block");
    for (std::size_t i : block) {
      if (i >= dim) throw std::invalid_argument("block partition index out of range");
      if (seen[i]++ != 0) throw std::invalid_argument("block partition index repeated");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("block partition does not cover every coordinate");
  }
}

// --- specs -------------------------------------------------------------------

BlockQuadraticSpec BlockQuadraticSpec::make_default(HessianLayout layout,
                                                    std::uint64_t rotation_seed) {
  BlockQuadraticSpec spec;
  spec.layout = layout;
  spec.rotation_seed = rotation_seed;
  if (layout == HessianLayout::heterogeneous) {
    spec.eigenvalue_blocks = {{1, 2, 3}, {99, 100, 101}, {4998, 4999, 5000}};
  } else {
    spec.eigenvalue_blocks = {{1, 99, 4998}, {2, 100, 4999}, {3, 101, 5000}};
  }
  return spec;
}

std::size_t BlockQuadraticSpec::dim() const {
  std::size_t d = 0;
  for (const auto& block : eigenvalue_blocks) d += block.size();
  return d;
}

void BlockQuadraticSpec::validate() const {
  if (eigenvalue_blocks.empty()) throw std::invalid_argument("quadratic spec has no blocks");
  for (const auto& block : eigenvalue_blocks) {
    if (block.empty()) throw std::invalid_argument("quadratic spec has an empty block");
    for (double lambda : block) {
      if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("quadratic spec eigenvalues must be positive and finite");
      }
    }
  }
}

void NoisyIsotropicSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("noisy isotropic spec: dim must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("noisy isotropic spec: sigma must be finite and >= 0");
  }
}

// --- construction --------------------------------------------------------------

Eigen::MatrixXd haar_block_rotation(Rng& rng, std::size_t n) {
  if (n < 1) throw std::invalid_argument("haar_block_rotation: n must be >= 1");
  const auto size = static_cast<Eigen::Index>(n);
  for (;;) {
    Eigen::MatrixXd a(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
      for (Eigen::Index j = 0; j < size; ++j) a(i, j) = rng.normal();
    }
    const Eigen::MatrixXd gram = a * a.transpose();
    SymmetricEigen eig = symmetric_eigen(0.5 * (gram + gram.transpose()));
    const double scale = std::max(eig.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
    bool degenerate = false;
    for (Eigen::Index k = 1; k < size; ++k) {
      if (eig.eigenvalues(k) - eig.eigenvalues(k - 1) <=
          64.0 * std::numeric_limits<double>::epsilon() * scale) {
        degenerate = true;
      }
    }
    if (!degenerate) return eig.eigenvectors;
  }
}

BlockQuadraticProblem build_hessian(const BlockQuadraticSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  BlockPartition blocks;
  Rng rng(spec.rotation_seed);
  Eigen::Index offset = 0;
  for (const auto& eigenvalues : spec.eigenvalue_blocks) {
    const auto n = static_cast<Eigen::Index>(eigenvalues.size());
    const Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(eigenvalues.data(), n);
    if (spec.identity_rotations) {
      h.block(offset, offset, n, n) = lambda.asDiagonal();
    } else {
      const Eigen::MatrixXd r = haar_block_rotation(rng, eigenvalues.size());
      h.block(offset, offset, n, n) = r * lambda.asDiagonal() * r.transpose();
    }
    std::vector<std::size_t> idx(eigenvalues.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<std::size_t>(offset) + k;
    blocks.push_back(std::move(idx));
    offset += n;
  }
  return BlockQuadraticProblem(SymmetricMatrix::from_eigen(h), std::move(blocks));
}

// --- BlockQuadraticProblem -----------------------------------------------------------

BlockQuadraticProblem::BlockQuadraticProblem(SymmetricMatrix hessian, BlockPartition blocks)
    : hessian_(std::move(hessian)), design_(psd_sqrt(hessian_)), blocks_(std::move(blocks)) {
  validate_partition(blocks_, hessian_.dim());
}

double BlockQuadraticProblem::loss(const ParamVector& w) const {
  if (w.size() != dim()) throw std::invalid_argument("loss: dimension mismatch");
  return 0.5 * dot(w, hessian_.apply(w));
}

ParamVector BlockQuadraticProblem::gradient(const ParamVector& w) const { return hessian_.apply(w); }

ParamVector BlockQuadraticProblem::hessian_vector(const ParamVector& /*w*/,
                                                  const ParamVector& v) const {
  return hessian_.apply(v);
}

std::vector<std::size_t> BlockQuadraticProblem::sample_batch(std::size_t batch_size,
                                                             Rng& rng) const {
  if (batch_size < 1) throw std::invalid_argument("sample_batch: batch size must be >= 1");
  std::vector<std::size_t> batch(batch_size);
  for (auto& i : batch) i = rng.uniform_index(n_rows());
  return batch;
}

ParamVector BlockQuadraticProblem::minibatch_gradient(const ParamVector& w,
                                                      std::span<const std::size_t> batch) const {
  if (batch.empty()) throw std::invalid_argument("minibatch_gradient: empty batch");
  if (w.size() != dim()) throw std::invalid_argument("minibatch_gradient: dimension mismatch");
  const auto& k = simd::active();
  const std::size_t d = dim();
  ParamVector g(d);
  for (std::size_t i : batch) {
    if (i >= n_rows()) throw std::invalid_argument("minibatch_gradient: row index out of range");
    const double* row = design_.row(i).data();
    k.axpy(k.dot(row, w.data(), d), row, g.data(), d);
  }
  g *= static_cast<double>(n_rows()) / static_cast<double>(batch.size());
  return g;
}

ParamVector BlockQuadraticProblem::stochastic_gradient(const ParamVector& w, std::size_t batch_size,
                                                       Rng& rng) const {
  const auto batch = sample_batch(batch_size, rng);
  return minibatch_gradient(w, batch);
}

Eigen::VectorXd BlockQuadraticProblem::spectrum() const {
  return symmetric_eigen(hessian_.to_eigen()).eigenvalues;
}

std::vector<double> BlockQuadraticProblem::block_condition_numbers() const {
  const Eigen::MatrixXd h = hessian_.to_eigen();
  std::vector<double> out;
  for (const auto& block : blocks_) {
    const auto n = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        sub(i, j) = h(static_cast<Eigen::Index>(block[static_cast<std::size_t>(i)]),
                      static_cast<Eigen::Index>(block[static_cast<std::size_t>(j)]));
      }
    }
    const Eigen::VectorXd ev = symmetric_eigen(sub).eigenvalues;
    out.push_back(ev.maxCoeff() / ev.minCoeff());
  }
  return out;
}

// --- NoisyIsotropicProblem ---------------------------------------------------------

NoisyIsotropicProblem::NoisyIsotropicProblem(NoisyIsotropicSpec spec) : spec_(spec) {
  spec_.validate();
}

double NoisyIsotropicProblem::loss(const ParamVector& w) const {
  if (w.size() != dim()) throw std::invalid_argument("loss: dimension mismatch");
  return 0.5 * dot(w, w);
}

ParamVector NoisyIsotropicProblem::gradient(const ParamVector& w) const {
  if (w.size() != dim()) throw std::invalid_argument("gradient: dimension mismatch");
  return w;
}

ParamVector NoisyIsotropicProblem::hessian_vector(const ParamVector& /*w*/,
                                                  const ParamVector& v) const {
  return v;
}

ParamVector NoisyIsotropicProblem::stochastic_gradient(const ParamVector& w, std::size_t batch_size,
                                                       Rng& rng) const {
  if (batch_size < 1) throw std::invalid_argument("stochastic_gradient: batch size must be >= 1");
  NoisyIsotropicSpec scaled_spec = spec_;
  scaled_spec.sigma = spec_.sigma / std::sqrt(static_cast<double>(batch_size));
  return noisy_gradient(w, scaled_spec, rng);
}

BlockPartition NoisyIsotropicProblem::blocks() const {
  std::vector<std::size_t> all(spec_.dim);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return {std::move(all)};
}

ParamVector noisy_gradient(const ParamVector& x, const NoisyIsotropicSpec& spec, Rng& rng) {
  if (x.size() != spec.dim) throw std::invalid_argument("noisy_gradient: dimension mismatch");
  ParamVector g = x;
  if (spec.sigma == 0.0) return g;
  for (auto& gi : g) gi += spec.sigma * rng.normal();
  return g;
}

ParamVector finite_difference_hvp(const GradientFn& grad, const ParamVector& x,
                                  const ParamVector& v) {
  require_same_dim(x, v, "finite_difference_hvp");
  const double vnorm = norm2(v);
  if (vnorm == 0.0) return ParamVector(v.size());
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + norm2(x)) /
                     std::max(vnorm, 1e-30);
  ParamVector plus = x;
  ParamVector minus = x;
  axpy(eps, v, plus);
  axpy(-eps, v, minus);
  ParamVector out = grad(plus) - grad(minus);
  out *= 1.0 / (2.0 * eps);
  return out;
}

}  // namespace batchgap
