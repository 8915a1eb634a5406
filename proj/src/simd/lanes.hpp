#pragma once

#include <cstddef>

namespace batchgap::simd::detail {

inline constexpr std::size_t kLanes = 4;

// One compensated accumulation step; shared by every reduction variant so the
// scalar tail of a vector kernel rounds exactly like the reference.
inline void kahan_add(double& sum, double& comp, double value) {
  const double y = value - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

inline double combine_lanes(const double* sum, const double* comp) {
  return ((sum[0] - comp[0]) + (sum[1] - comp[1])) + ((sum[2] - comp[2]) + (sum[3] - comp[3]));
}

}  // namespace batchgap::simd::detail
