#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace batchgap {

// Dense parameter vector (model weights, gradients, updates).
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  const std::vector<double>& values() const { return values_; }

  bool all_finite() const;

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator*=(double alpha);

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

// Throws std::invalid_argument when the dimensions differ.
void require_same_dim(const ParamVector& a, const ParamVector& b, const char* what);

// Compensated dot product (see simd/kernels.hpp for the accumulation order).
double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& v);

// y += alpha * x
void axpy(double alpha, const ParamVector& x, ParamVector& y);
ParamVector scaled(double alpha, const ParamVector& v);

ParamVector operator+(const ParamVector& a, const ParamVector& b);
ParamVector operator-(const ParamVector& a, const ParamVector& b);

// g * min(1, c / ||g||). A zero vector is returned unchanged.
ParamVector global_norm_clip(const ParamVector& g, double threshold);

// Entries in {-1, 0, +1} with sign(0) = 0.
ParamVector componentwise_sign(const ParamVector& g);

}  // namespace batchgap
