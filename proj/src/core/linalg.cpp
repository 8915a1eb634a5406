#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "batchgap/core/param_vector.hpp"
#include "batchgap/core/symmetric_matrix.hpp"
#include "batchgap/simd/kernels.hpp"

namespace batchgap {

bool ParamVector::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  axpy(1.0, other, *this);
  return *this;
}

ParamVector& ParamVector::operator*=(double alpha) {
  simd::active().scale(alpha, data(), data(), size());
  return *this;
}

void require_same_dim(const ParamVector& a, const ParamVector& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "dot");
  return simd::active().dot(a.data(), b.data(), a.size());
}

double norm2(const ParamVector& v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, const ParamVector& x, ParamVector& y) {
  require_same_dim(x, y, "axpy");
  simd::active().axpy(alpha, x.data(), y.data(), x.size());
}

ParamVector scaled(double alpha, const ParamVector& v) {
  ParamVector out(v.size());
  simd::active().scale(alpha, v.data(), out.data(), v.size());
  return out;
}

ParamVector operator+(const ParamVector& a, const ParamVector& b) {
  ParamVector out = a;
  axpy(1.0, b, out);
  return out;
}

ParamVector operator-(const ParamVector& a, const ParamVector& b) {
  ParamVector out = a;
  axpy(-1.0, b, out);
  return out;
}

ParamVector global_norm_clip(const ParamVector& g, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("global_norm_clip: threshold must be > 0");
  // A vector that was already clipped may measure a few ulp above the
  // threshold; leaving it alone keeps the operation idempotent.
  constexpr double kSlack = 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
  const double norm = norm2(g);
  if (norm <= threshold * kSlack) return g;
  return scaled(threshold / norm, g);
}

ParamVector componentwise_sign(const ParamVector& g) {
  ParamVector out(g.size());
  simd::active().sign(g.data(), out.data(), g.size());
  return out;
}

// --- SymmetricMatrix -------------------------------------------------------

SymmetricMatrix::SymmetricMatrix(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0) {}

SymmetricMatrix::SymmetricMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), values_(std::move(row_major)) {
  if (values_.size() != dim * dim) throw std::invalid_argument("SymmetricMatrix: size mismatch");
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      const double a = values_[i * dim + j];
      const double b = values_[j * dim + i];
      if (std::fabs(a - b) > 1e-12 * std::max(1.0, std::fabs(a))) {
        throw std::invalid_argument("SymmetricMatrix: input is not symmetric");
      }
    }
  }
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
  SymmetricMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.values_[i * dim + i] = 1.0;
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> diag) {
  SymmetricMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.values_[i * diag.size() + i] = diag[i];
  return m;
}

SymmetricMatrix SymmetricMatrix::from_eigen(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymmetricMatrix: matrix is not square");
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<double> values(n * n);
  // Average the triangles so round-off asymmetry from products does not leak.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      values[i * n + j] = i == j ? m(ii, jj) : 0.5 * (m(ii, jj) + m(jj, ii));
    }
  }
  return SymmetricMatrix(n, std::move(values));
}

ParamVector SymmetricMatrix::apply(const ParamVector& v) const {
  if (v.size() != dim_) throw std::invalid_argument("SymmetricMatrix::apply: dimension mismatch");
  ParamVector out(dim_);
  const auto& k = simd::active();
  for (std::size_t i = 0; i < dim_; ++i) out[i] = k.dot(values_.data() + i * dim_, v.data(), dim_);
  return out;
}

Eigen::MatrixXd SymmetricMatrix::to_eigen() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = values_[static_cast<std::size_t>(i * n + j)];
  }
  return m;
}

void canonicalize_column_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      if (vectors(r, c) != 0.0) {
        if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric_eigen: solver failed");
  SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
  canonicalize_column_signs(out.eigenvectors);
  return out;
}

SymmetricMatrix psd_sqrt(const SymmetricMatrix& a) {
  const SymmetricEigen eig = symmetric_eigen(a.to_eigen());
  const Eigen::VectorXd root = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd s = eig.eigenvectors * root.asDiagonal() * eig.eigenvectors.transpose();
  return SymmetricMatrix::from_eigen(s);
}

}  // namespace batchgap
