#pragma once

#include <optional>
#include <string>

namespace batchgap::harness {

// Shortest decimal that round-trips to the same double ("inf", "-inf", "nan"
// for non-finite values). Locale-independent.
std::string format_number(double x);
// Empty string for a missing value.
std::string format_optional(const std::optional<double>& x);

}  // namespace batchgap::harness
