#include "offtarget/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offtarget {

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Pretrain:
      return "pretrain";
    case Phase::Standard:
      return "standard";
    case Phase::Generalization:
      return "generalization";
  }
  return "";
}

Phase phase_from_string(const std::string& text) {
  if (text == "pretrain") return Phase::Pretrain;
  if (text == "standard") return Phase::Standard;
  if (text == "generalization") return Phase::Generalization;
  throw std::invalid_argument("unknown phase: " + text);
}

std::int64_t TrainSchedule::gen_warmup() const {
  return std::llround(0.3 * static_cast<double>(gen_steps));
}

void TrainSchedule::validate() const {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
  if (gen_steps < 0 || gen_steps > total_steps) throw std::invalid_argument("gen_steps must lie in [0, total_steps]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be non-negative");
  if (!(peak_lr > 0) || !(gen_peak_lr > 0)) throw std::invalid_argument("learning rates must be positive");
  if (!(xc_ratio >= 0 && xc_ratio <= 1)) throw std::invalid_argument("xc_ratio must lie in [0, 1]");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be positive");
  if (!(label_smoothing >= 0 && label_smoothing < 1)) throw std::invalid_argument("label_smoothing must lie in [0, 1)");
}

double inverse_sqrt_lr(double peak, std::int64_t warmup, std::int64_t u) {
  if (u < 1) throw std::invalid_argument("local step must be 1-based");
  if (warmup <= 0) return peak;
  const double x = static_cast<double>(u);
  const double w = static_cast<double>(warmup);
  return peak * std::min(x / w, std::sqrt(w / x));
}

Phase phase_at(std::int64_t step, const TrainSchedule& s) {
  if (step < 0 || step >= s.total_steps) throw std::out_of_range("step outside the schedule");
  return step < s.phase_boundary() ? Phase::Standard : Phase::Generalization;
}

double lr_at(std::int64_t step, const TrainSchedule& s) {
  if (phase_at(step, s) == Phase::Standard) return inverse_sqrt_lr(s.peak_lr, s.warmup_steps, step + 1);
  return inverse_sqrt_lr(s.gen_peak_lr, s.gen_warmup(), step - s.phase_boundary() + 1);
}

nlohmann::json to_json(const TrainSchedule& s) {
  return {{"total_steps", s.total_steps}, {"gen_steps", s.gen_steps},     {"batch_size", s.batch_size},
          {"warmup_steps", s.warmup_steps}, {"peak_lr", s.peak_lr},       {"gen_peak_lr", s.gen_peak_lr},
          {"xc_ratio", s.xc_ratio},         {"eval_every", s.eval_every}, {"label_smoothing", s.label_smoothing},
          {"seed", s.seed}};
}

TrainSchedule schedule_from_json(const nlohmann::json& j) {
  TrainSchedule s;
  s.total_steps = j.value("total_steps", s.total_steps);
  s.gen_steps = j.value("gen_steps", s.gen_steps);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.warmup_steps = j.value("warmup_steps", s.warmup_steps);
  s.peak_lr = j.value("peak_lr", s.peak_lr);
  s.gen_peak_lr = j.value("gen_peak_lr", s.gen_peak_lr);
  s.xc_ratio = j.value("xc_ratio", s.xc_ratio);
  s.eval_every = j.value("eval_every", s.eval_every);
  s.label_smoothing = j.value("label_smoothing", s.label_smoothing);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace offtarget
