#include <cstdlib>
#include <stdexcept>
#include <string>

#include "batchgap/simd/kernels.hpp"

namespace batchgap::simd {
namespace {

bool cpu_has_avx2() {
#if defined(BATCHGAP_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& select() {
  const char* env = std::getenv("BATCHGAP_SIMD");
  const std::string request = env != nullptr ? env : "auto";
  if (request == "scalar") return detail::scalar_table();
  if (request == "avx2") {
    if (const KernelTable* t = table_for(Isa::avx2)) return *t;
    throw std::runtime_error("BATCHGAP_SIMD=avx2 requested but AVX2 is unavailable");
  }
  if (request != "auto") throw std::runtime_error("unknown BATCHGAP_SIMD value: " + request);
  if (const KernelTable* t = table_for(Isa::avx2)) return *t;
  return detail::scalar_table();
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &detail::scalar_table();
    case Isa::avx2:
#if defined(BATCHGAP_WITH_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (table_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

}  // namespace batchgap::simd
