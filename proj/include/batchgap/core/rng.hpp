#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace batchgap {

// xoshiro256** seeded through splitmix64. Every derived quantity (uniforms,
// bounded indices, normals) is computed with portable integer arithmetic or
// IEEE-exact operations plus std::log, so a seed reproduces the same stream on
// any conforming platform.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on {0, ..., n-1}; Lemire's multiply-shift with rejection.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via the Marsaglia polar method.
  double normal();

  // Independent child generator for a named sub-stream.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
// Deterministic seed for sub-stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace batchgap
