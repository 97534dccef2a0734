#include "offtarget/trainer.hpp"

#include <stdexcept>

namespace offtarget {

template <typename T>
CurveEvaluator<T> multiway_evaluator(const ModelConfig& config, TaggingScheme scheme, MultiwayTestSet set,
                                     Languages languages, std::vector<int> centric_set) {
  return [config, scheme, set = std::move(set), languages = std::move(languages),
          centric = std::move(centric_set)](const Parameters<T>& params) {
    return evaluate(params, config, scheme, set, languages, centric);
  };
}

template <typename T>
Trainer<T>::Trainer(ModelConfig config, TrainSchedule schedule, std::shared_ptr<const BatchSampler> sampler,
                    Parameters<T> init, bool pretraining)
    : config_(std::move(config)),
      schedule_(schedule),
      sampler_(std::move(sampler)),
      params_(std::move(init)),
      opt_(AdamState<T>::for_params(params_)),
      pretraining_(pretraining) {
  config_.validate();
  schedule_.validate();
  if (!sampler_) throw std::invalid_argument("trainer needs a sampler");
  if (params_.layout.tensors != ParamLayout::build(config_).tensors)
    throw std::invalid_argument("initial parameters do not match the model configuration");
  if (pretraining_ && schedule_.gen_steps != 0) throw std::invalid_argument("pretraining has no generalization phase");
}

template <typename T>
Trainer<T> Trainer<T>::resume(const Checkpoint<T>& ckpt, TrainSchedule schedule,
                              std::shared_ptr<const BatchSampler> sampler, bool pretraining) {
  Trainer t(ckpt.config, schedule, std::move(sampler), ckpt.params, pretraining);
  if (ckpt.step < 0 || ckpt.step > schedule.total_steps) throw std::invalid_argument("checkpoint step outside the schedule");
  t.step_ = ckpt.step;
  if (ckpt.optimizer) t.opt_ = *ckpt.optimizer;
  return t;
}

template <typename T>
void Trainer<T>::set_schedule(const TrainSchedule& s) {
  s.validate();
  auto phase1 = [](TrainSchedule x) {
    x.gen_steps = 0;
    x.xc_ratio = 0;
    x.gen_peak_lr = 1;
    return x;
  };
  if (phase1(s) != phase1(schedule_)) throw std::invalid_argument("forked schedule changes phase-1 settings");
  if (step_ > s.phase_boundary() || step_ > schedule_.phase_boundary())
    throw std::invalid_argument("forked schedule diverges before the current step");
  schedule_ = s;
}

template <typename T>
Phase Trainer<T>::current_phase() const {
  if (pretraining_) return Phase::Pretrain;
  return phase_at(std::min(step_, schedule_.total_steps - 1), schedule_);
}

template <typename T>
void Trainer<T>::step() {
  if (step_ >= schedule_.total_steps) throw std::logic_error("training already finished");
  const Phase phase = phase_at(step_, schedule_);
  const auto s = static_cast<std::uint64_t>(step_);
  Rng data_rng(derive_seed(schedule_.seed, {s, 0}));
  const Batch batch =
      sampler_->sample(phase, schedule_.xc_ratio, static_cast<std::size_t>(schedule_.batch_size), data_rng);
  Rng drop_rng(derive_seed(schedule_.seed, {s, 1}));
  const auto lg = loss_and_grads(params_, config_, batch, schedule_.label_smoothing, drop_rng);
  adam_update(params_, lg.grads, opt_, lr_at(step_, schedule_));
  loss_sum_ += lg.loss;
  ++loss_count_;
  ++step_;
}

template <typename T>
void Trainer<T>::record_row() {
  CurveRow row;
  row.step = step_;
  const std::int64_t last = std::max<std::int64_t>(step_ - 1, 0);
  row.phase = pretraining_ ? Phase::Pretrain : phase_at(last, schedule_);
  row.lr = lr_at(last, schedule_);
  if (loss_count_ > 0) row.loss = loss_sum_ / static_cast<double>(loss_count_);
  loss_sum_ = 0;
  loss_count_ = 0;
  if (evaluator_) row.set_metrics(evaluator_(params_));
  log_.rows.push_back(row);
}

template <typename T>
void Trainer<T>::run_until(std::int64_t target) {
  if (target > schedule_.total_steps) throw std::invalid_argument("target step beyond the schedule");
  if (step_ == 0 && log_.rows.empty()) record_row();
  while (step_ < target) {
    step();
    if (step_ % schedule_.eval_every == 0) record_row();
    if (hook_ && schedule_.gen_steps > 0 && step_ == schedule_.phase_boundary()) hook_(*this, "phase_boundary");
    if (hook_ && step_ == schedule_.total_steps) hook_(*this, "final");
  }
}

template <typename T>
Checkpoint<T> Trainer<T>::checkpoint() const {
  Checkpoint<T> c;
  c.config = config_;
  c.step = step_;
  c.params = params_;
  c.optimizer = opt_;
  c.metadata = {{"phase", to_string(current_phase())},
                {"schedule", to_json(schedule_)},
                {"scheme", to_string(sampler_->scheme())}};
  return c;
}

template class Trainer<float>;
template class Trainer<double>;
template CurveEvaluator<float> multiway_evaluator<float>(const ModelConfig&, TaggingScheme, MultiwayTestSet,
                                                         Languages, std::vector<int>);
template CurveEvaluator<double> multiway_evaluator<double>(const ModelConfig&, TaggingScheme, MultiwayTestSet,
                                                           Languages, std::vector<int>);

}  // namespace offtarget
