#include "batchgap/harness/csv.hpp"

#include <charconv>
#include <cmath>

namespace batchgap::harness {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, result.ptr);
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

}  // namespace batchgap::harness
