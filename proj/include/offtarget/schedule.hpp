#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace offtarget {

enum class Phase { Pretrain, Standard, Generalization };

std::string to_string(Phase phase);
Phase phase_from_string(const std::string& text);

/// Two-phase finetuning schedule. Steps are 0-based; the last gen_steps of
/// total_steps form the generalization phase.
struct TrainSchedule {
  std::int64_t total_steps = 20000;
  std::int64_t gen_steps = 2000;
  int batch_size = 64;
  std::int64_t warmup_steps = 500;
  double peak_lr = 5e-4;
  double gen_peak_lr = 3e-4;
  // kept fraction of (non-centric -> centric) instances in phase 2
  double xc_ratio = 0.0;
  std::int64_t eval_every = 500;
  double label_smoothing = 0.2;
  std::uint64_t seed = 0;

  std::int64_t gen_warmup() const;
  std::int64_t phase_boundary() const { return total_steps - gen_steps; }
  void validate() const;

  friend bool operator==(const TrainSchedule&, const TrainSchedule&) = default;
};

/// peak * min(u / warmup, sqrt(warmup / u)) for 1-based u; constant when warmup is 0.
double inverse_sqrt_lr(double peak, std::int64_t warmup, std::int64_t u);

Phase phase_at(std::int64_t step, const TrainSchedule& schedule);

/// Learning rate for 0-based global step `step`, restarting the warmup at
/// the phase boundary with gen_peak_lr and gen_warmup.
double lr_at(std::int64_t step, const TrainSchedule& schedule);

nlohmann::json to_json(const TrainSchedule& s);
/// Missing keys keep their defaults.
TrainSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace offtarget
