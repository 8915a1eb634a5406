#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstdint>

#include "batchgap/simd/kernels.hpp"
#include "simd/lanes.hpp"

namespace batchgap::simd::detail {
namespace {

constexpr std::size_t kWidth = 4;

inline __m256d abs_pd(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d vsum = _mm256_setzero_pd();
  __m256d vcomp = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d y = _mm256_sub_pd(prod, vcomp);
    const __m256d t = _mm256_add_pd(vsum, y);
    vcomp = _mm256_sub_pd(_mm256_sub_pd(t, vsum), y);
    vsum = t;
  }
  alignas(32) double sum[kLanes];
  alignas(32) double comp[kLanes];
  _mm256_store_pd(sum, vsum);
  _mm256_store_pd(comp, vcomp);
  for (; i < n; ++i) kahan_add(sum[i % kLanes], comp[i % kLanes], a[i] * b[i]);
  return combine_lanes(sum, comp);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void heavy_ball(double beta, const double* g, double* m, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d prod = _mm256_mul_pd(vb, _mm256_loadu_pd(m + i));
    _mm256_storeu_pd(m + i, _mm256_add_pd(prod, _mm256_loadu_pd(g + i)));
  }
  for (; i < n; ++i) m[i] = beta * m[i] + g[i];
}

void sign(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d minus_one = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ), one);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ), minus_one);
    _mm256_storeu_pd(out + i, _mm256_or_pd(pos, neg));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
}

void clip_magnitude(const double* x, double tau, double* out, std::size_t n) {
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d v = _mm256_loadu_pd(x + i);
    // min_pd(a, b) returns a < b ? a : b, matching the scalar reference.
    const __m256d mag = _mm256_min_pd(vtau, abs_pd(v));
    _mm256_storeu_pd(out + i, _mm256_or_pd(mag, _mm256_and_pd(v, sign_mask)));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(x[i]);
    out[i] = std::copysign(tau < mag ? tau : mag, x[i]);
  }
}

std::size_t count_above(const double* x, double threshold, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d gt = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), vt, _CMP_GT_OQ);
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(gt))));
  }
  for (; i < n; ++i) count += std::fabs(x[i]) > threshold ? 1 : 0;
  return count;
}

void adam_update(const AdamCoefficients& c, const double* g, double* m, double* v, double* delta,
                 std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
  const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d eps = _mm256_set1_pd(c.eps);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + kWidth <= n; i += kWidth) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, bc1);
    const __m256d vhat = _mm256_div_pd(vi, bc2);
    const __m256d step = _mm256_mul_pd(lr, _mm256_div_pd(mhat, _mm256_add_pd(_mm256_sqrt_pd(vhat), eps)));
    _mm256_storeu_pd(delta + i, _mm256_xor_pd(step, sign_mask));
  }
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
    const double mhat = m[i] / c.bias_correction1;
    const double vhat = v[i] / c.bias_correction2;
    delta[i] = -(c.lr * (mhat / (std::sqrt(vhat) + c.eps)));
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, dot,  axpy,           scale,      heavy_ball,
                                 sign,      clip_magnitude, count_above, adam_update};
  return table;
}

}  // namespace batchgap::simd::detail
