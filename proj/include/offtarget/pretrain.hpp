#pragma once

#include "offtarget/trainer.hpp"

namespace offtarget {

struct PretrainConfig {
  std::int64_t steps = 5000;
  int batch_size = 64;
  std::int64_t warmup_steps = 500;
  double peak_lr = 5e-4;
  double label_smoothing = 0.2;
  // replaces the model's dropout while pretraining; finetuning keeps its own
  double dropout_prob = 0.0;
  std::int64_t eval_every = 500;
  std::size_t size_per_lang = 20000;
  NoisingConfig noising;
  SamplingParams sampling;
  std::uint64_t seed = 0;

  void validate() const;
  /// The equivalent single-phase schedule.
  TrainSchedule schedule() const;
};

nlohmann::json to_json(const PretrainConfig& c);
PretrainConfig pretrain_config_from_json(const nlohmann::json& j);

template <typename T>
struct PretrainResult {
  Parameters<T> params;
  CurveLog curve;
  std::int64_t steps = 0;
};

/// Denoising pretraining with SrcTgtTags framing: each language reconstructs
/// its own sentences from a corrupted copy. The corpus is drawn from
/// derive_seed(seed, {0x9e7}).
template <typename T>
PretrainResult<T> pretrain(const Languages& languages, const PretrainConfig& cfg, const ModelConfig& model,
                           std::uint64_t init_seed, CurveEvaluator<T> evaluator = {});

}  // namespace offtarget
