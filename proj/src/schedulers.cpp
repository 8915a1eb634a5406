#include "batchgap/schedulers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace batchgap {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant:
      return "constant";
    case ScheduleKind::cosine_warmup:
      return "cosine_warmup";
    case ScheduleKind::wsd:
      return "wsd";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "cosine_warmup" || name == "cosine") return ScheduleKind::cosine_warmup;
  if (name == "wsd") return ScheduleKind::wsd;
  throw std::invalid_argument("unknown schedule kind: " + std::string(name));
}

std::string_view to_string(DecayShape shape) {
  return shape == DecayShape::linear ? "linear" : "one_minus_sqrt";
}

DecayShape parse_decay_shape(std::string_view name) {
  if (name == "linear") return DecayShape::linear;
  if (name == "one_minus_sqrt") return DecayShape::one_minus_sqrt;
  throw std::invalid_argument("unknown decay shape: " + std::string(name));
}

void ScheduleSpec::validate() const {
  if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr)) {
    throw std::invalid_argument("schedule peak_lr must be finite and >= 0");
  }
  if (total_steps < 0) throw std::invalid_argument("schedule total_steps must be >= 0");
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw std::invalid_argument("schedule warmup_steps must lie in [0, total_steps]");
  }
  if (kind != ScheduleKind::constant && !(floor_lr >= 0.0 && floor_lr <= peak_lr)) {
    throw std::invalid_argument("schedule floor_lr must lie in [0, peak_lr]");
  }
  if (kind == ScheduleKind::wsd && !(decay_fraction > 0.0 && decay_fraction < 1.0)) {
    throw std::invalid_argument("wsd decay_fraction must lie in (0, 1)");
  }
}

double lr_at(const ScheduleSpec& spec, long t) {
  if (t < 0 || t > spec.total_steps) {
    throw std::out_of_range("lr_at: step " + std::to_string(t) + " outside [0, " +
                            std::to_string(spec.total_steps) + "]");
  }
  if (spec.kind == ScheduleKind::constant) return spec.peak_lr;
  if (t < spec.warmup_steps) {
    return spec.peak_lr * static_cast<double>(t) / static_cast<double>(spec.warmup_steps);
  }
  const double peak = spec.peak_lr;
  const double floor = spec.floor_lr;
  const auto T = static_cast<double>(spec.total_steps);
  if (spec.kind == ScheduleKind::cosine_warmup) {
    const double span = T - static_cast<double>(spec.warmup_steps);
    if (span <= 0.0) return peak;
    const double s = (static_cast<double>(t) - static_cast<double>(spec.warmup_steps)) / span;
    return floor + (peak - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * s));
  }
  const double decay_start = std::max((1.0 - spec.decay_fraction) * T,
                                      static_cast<double>(spec.warmup_steps));
  if (static_cast<double>(t) <= decay_start || T <= decay_start) return peak;
  const double s = (static_cast<double>(t) - decay_start) / (T - decay_start);
  const double remaining = spec.decay_shape == DecayShape::linear ? 1.0 - s : 1.0 - std::sqrt(s);
  return floor + (peak - floor) * remaining;
}

}  // namespace batchgap
