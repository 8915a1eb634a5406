#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "batchgap/core/param_vector.hpp"

namespace batchgap {

// Dense symmetric matrix, row-major. Construction checks symmetry to
// |A[i,j] - A[j,i]| <= 1e-12 * max(1, |A[i,j]|).
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim);
  SymmetricMatrix(std::size_t dim, std::vector<double> row_major);

  static SymmetricMatrix identity(std::size_t dim);
  static SymmetricMatrix diagonal(std::span<const double> diag);
  static SymmetricMatrix from_eigen(const Eigen::MatrixXd& m);

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const { return values_; }

  ParamVector apply(const ParamVector& v) const;
  Eigen::MatrixXd to_eigen() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct SymmetricEigen {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, first nonzero entry of each positive
};

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

// Flip columns so the first entry with |x| > 0 in each column is positive.
void canonicalize_column_signs(Eigen::MatrixXd& vectors);

// Symmetric PSD square root V diag(sqrt(max(lambda, 0))) V^T.
SymmetricMatrix psd_sqrt(const SymmetricMatrix& a);

}  // namespace batchgap
