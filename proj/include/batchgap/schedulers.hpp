#pragma once

#include <string_view>

namespace batchgap {

enum class ScheduleKind { constant, cosine_warmup, wsd };
enum class DecayShape { linear, one_minus_sqrt };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(DecayShape shape);
DecayShape parse_decay_shape(std::string_view name);

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::constant;
  double peak_lr = 1e-3;
  long total_steps = 1;
  long warmup_steps = 0;
  double floor_lr = 1e-5;
  double decay_fraction = 0.2;  // wsd: share of total_steps spent decaying
  DecayShape decay_shape = DecayShape::linear;

  void validate() const;
};

// Learning rate at step t in [0, total_steps].
//
// Warmup rises linearly from 0 at t = 0 to peak_lr at t = warmup_steps.
// cosine_warmup then follows floor + (peak - floor) * (1 + cos(pi * s)) / 2
// with s = (t - warmup) / (T - warmup). wsd stays at peak until
// (1 - decay_fraction) * T and then decays to floor along decay_shape.
double lr_at(const ScheduleSpec& spec, long t);

}  // namespace batchgap
