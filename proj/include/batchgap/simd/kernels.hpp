#pragma once
// Data-parallel inner loops used by every module.
//
// Each kernel has a portable scalar reference implementation and, where the
// target supports it, an AVX2 variant. The variant is chosen once at runtime
// (CPUID, overridable with BATCHGAP_SIMD=scalar|avx2|auto). All variants
// produce bit-identical results: elementwise kernels perform the same IEEE
// operations in the same order, and reductions use a fixed four-lane
// compensated (Kahan) accumulation where element i always feeds lane i % 4.
// The build disables FMA contraction so the equivalence holds.

#include <cstddef>
#include <string_view>
#include <vector>

namespace batchgap::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamCoefficients {
  double beta1;
  double beta2;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
  double eps;
  double lr;
};

struct KernelTable {
  Isa isa;

  // Compensated dot product, four interleaved Kahan lanes combined pairwise.
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x  (out may alias x)
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  // m = beta * m + g
  void (*heavy_ball)(double beta, const double* g, double* m, std::size_t n);
  // out in {-1, 0, +1}; sign(0) = 0, NaN maps to 0
  void (*sign)(const double* x, double* out, std::size_t n);
  // out = copysign(min(|x|, tau), x)
  void (*clip_magnitude)(const double* x, double tau, double* out, std::size_t n);
  // number of entries with |x| > threshold
  std::size_t (*count_above)(const double* x, double threshold, std::size_t n);
  // m, v updated in place; delta = -(lr * (mhat / (sqrt(vhat) + eps)))
  void (*adam_update)(const AdamCoefficients& c, const double* g, double* m, double* v,
                      double* delta, std::size_t n);
};

// Kernel set selected for this process.
const KernelTable& active();

// Kernel set for a specific ISA, or nullptr when it was not compiled in or the
// CPU lacks it.
const KernelTable* table_for(Isa isa);

std::vector<Isa> available_isas();

namespace detail {
const KernelTable& scalar_table();
#if defined(BATCHGAP_WITH_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace batchgap::simd
