#include "offtarget/pretrain.hpp"

#include <stdexcept>

namespace offtarget {

void PretrainConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("pretraining needs at least one step");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) throw std::invalid_argument("pretraining dropout must lie in [0, 1)");
  if (size_per_lang < 1) throw std::invalid_argument("pretraining corpus must be non-empty");
  noising.validate();
  sampling.validate();
  schedule().validate();
}

TrainSchedule PretrainConfig::schedule() const {
  TrainSchedule s;
  s.total_steps = steps;
  s.gen_steps = 0;
  s.batch_size = batch_size;
  s.warmup_steps = warmup_steps;
  s.peak_lr = peak_lr;
  s.label_smoothing = label_smoothing;
  s.eval_every = eval_every;
  s.seed = derive_seed(seed, {0x57e9});
  return s;
}

nlohmann::json to_json(const PretrainConfig& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"warmup_steps", c.warmup_steps},
          {"peak_lr", c.peak_lr},
          {"label_smoothing", c.label_smoothing},
          {"dropout_prob", c.dropout_prob},
          {"eval_every", c.eval_every},
          {"size_per_lang", c.size_per_lang},
          {"mask_prob", c.noising.mask_prob},
          {"shuffle_window", c.noising.shuffle_window},
          {"sampling", {{"zipf_s", c.sampling.zipf_s}, {"min_len", c.sampling.min_len}, {"max_len", c.sampling.max_len}}},
          {"seed", c.seed}};
}

PretrainConfig pretrain_config_from_json(const nlohmann::json& j) {
  PretrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.peak_lr = j.value("peak_lr", c.peak_lr);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  c.dropout_prob = j.value("dropout_prob", c.dropout_prob);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.size_per_lang = j.value("size_per_lang", c.size_per_lang);
  c.noising.mask_prob = j.value("mask_prob", c.noising.mask_prob);
  c.noising.shuffle_window = j.value("shuffle_window", c.noising.shuffle_window);
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    c.sampling.zipf_s = s.value("zipf_s", c.sampling.zipf_s);
    c.sampling.min_len = s.value("min_len", c.sampling.min_len);
    c.sampling.max_len = s.value("max_len", c.sampling.max_len);
  }
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

template <typename T>
PretrainResult<T> pretrain(const Languages& languages, const PretrainConfig& cfg, const ModelConfig& model,
                           std::uint64_t init_seed, CurveEvaluator<T> evaluator) {
  cfg.validate();
  auto corpus = make_denoising_corpus(languages, cfg.size_per_lang, cfg.noising, cfg.sampling,
                                      derive_seed(cfg.seed, {0x9e7}));
  auto sampler = std::make_shared<const BatchSampler>(std::move(corpus), std::vector<int>{}, TaggingScheme::SrcTgtTags);
  auto arch = model;
  arch.dropout_prob = cfg.dropout_prob;
  Trainer<T> trainer(arch, cfg.schedule(), sampler, init_params<T>(model, init_seed), true);
  if (evaluator) trainer.set_evaluator(std::move(evaluator));
  trainer.run();
  return {trainer.params(), trainer.curve(), trainer.steps_done()};
}

template PretrainResult<float> pretrain<float>(const Languages&, const PretrainConfig&, const ModelConfig&,
                                               std::uint64_t, CurveEvaluator<float>);
template PretrainResult<double> pretrain<double>(const Languages&, const PretrainConfig&, const ModelConfig&,
                                                 std::uint64_t, CurveEvaluator<double>);

}  // namespace offtarget
