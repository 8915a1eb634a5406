#include <cmath>

#include "batchgap/simd/kernels.hpp"
#include "simd/lanes.hpp"

namespace batchgap::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double sum[kLanes] = {0.0, 0.0, 0.0, 0.0};
  double comp[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    kahan_add(sum[i % kLanes], comp[i % kLanes], a[i] * b[i]);
  }
  return combine_lanes(sum, comp);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void heavy_ball(double beta, const double* g, double* m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) m[i] = beta * m[i] + g[i];
}

void sign(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  }
}

void clip_magnitude(const double* x, double tau, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(x[i]);
    out[i] = std::copysign(tau < mag ? tau : mag, x[i]);
  }
}

std::size_t count_above(const double* x, double threshold, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += std::fabs(x[i]) > threshold ? 1 : 0;
  return count;
}

void adam_update(const AdamCoefficients& c, const double* g, double* m, double* v, double* delta,
                 std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
    const double mhat = m[i] / c.bias_correction1;
    const double vhat = v[i] / c.bias_correction2;
    delta[i] = -(c.lr * (mhat / (std::sqrt(vhat) + c.eps)));
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, dot,  axpy,           scale,      heavy_ball,
                                 sign,        clip_magnitude, count_above, adam_update};
  return table;
}

}  // namespace batchgap::simd::detail
