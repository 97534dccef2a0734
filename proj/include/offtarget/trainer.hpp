#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "offtarget/adam.hpp"
#include "offtarget/checkpoint.hpp"
#include "offtarget/curve_log.hpp"
#include "offtarget/sampler.hpp"
#include "offtarget/schedule.hpp"
#include "offtarget/transformer.hpp"

namespace offtarget {

template <typename T>
using CurveEvaluator = std::function<EvalReport(const Parameters<T>&)>;

/// Evaluator that decodes the given multiway rows in every direction.
template <typename T>
CurveEvaluator<T> multiway_evaluator(const ModelConfig& config, TaggingScheme scheme, MultiwayTestSet set,
                                     Languages languages, std::vector<int> centric_set);

/// Training loop over a BatchSampler. Step s draws its batch from
/// derive_seed(seed, {s, 0}) and its dropout masks from derive_seed(seed, {s, 1}),
/// so a run is a pure function of its inputs and two runs sharing a prefix
/// of the schedule share that prefix of the trajectory. Copying a Trainer
/// forks the run; see set_schedule.
template <typename T>
class Trainer {
 public:
  using CheckpointHook = std::function<void(const Trainer&, const std::string& tag)>;

  Trainer(ModelConfig config, TrainSchedule schedule, std::shared_ptr<const BatchSampler> sampler,
          Parameters<T> init, bool pretraining = false);

  /// Resume from a checkpoint, restoring the optimizer when it is present.
  static Trainer resume(const Checkpoint<T>& ckpt, TrainSchedule schedule,
                        std::shared_ptr<const BatchSampler> sampler, bool pretraining = false);

  void set_evaluator(CurveEvaluator<T> evaluator) { evaluator_ = std::move(evaluator); }
  /// Called with "phase_boundary" after step N - G (when G > 0) and "final" after step N.
  void set_checkpoint_hook(CheckpointHook hook) { hook_ = std::move(hook); }

  /// Replaces the schedule of a forked run. Every step already taken must
  /// belong to phase 1 under both schedules, with identical phase-1 settings.
  void set_schedule(const TrainSchedule& schedule);

  void step();
  void run_until(std::int64_t target_step);
  void run() { run_until(schedule_.total_steps); }

  std::int64_t steps_done() const { return step_; }
  const Parameters<T>& params() const { return params_; }
  const AdamState<T>& optimizer() const { return opt_; }
  const CurveLog& curve() const { return log_; }
  const TrainSchedule& schedule() const { return schedule_; }
  const ModelConfig& config() const { return config_; }
  Phase current_phase() const;

  Checkpoint<T> checkpoint() const;

 private:
  void record_row();

  ModelConfig config_;
  TrainSchedule schedule_;
  std::shared_ptr<const BatchSampler> sampler_;
  Parameters<T> params_;
  AdamState<T> opt_;
  bool pretraining_ = false;
  std::int64_t step_ = 0;
  CurveLog log_;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
  CurveEvaluator<T> evaluator_;
  CheckpointHook hook_;
};

}  // namespace offtarget
