#include "offtarget/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace offtarget {

BatchSampler::BatchSampler(ParallelCorpus corpus, std::vector<int> centric_set, TaggingScheme scheme)
    : corpus_(std::move(corpus)), centric_(std::move(centric_set)), scheme_(scheme) {
  if (corpus_.empty()) throw std::invalid_argument("sampler: empty corpus");
  tagged_.reserve(corpus_.size());
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    const auto& p = corpus_.pairs[i];
    tagged_.push_back(apply_tags(p, scheme_));
    const bool centric_target = std::find(centric_.begin(), centric_.end(), p.tgt_lang) != centric_.end();
    (centric_target ? to_centric_ : to_non_centric_).push_back(i);
  }
}

double BatchSampler::to_centric_probability(double xc_ratio) const {
  return xc_ratio * static_cast<double>(to_centric_.size()) / static_cast<double>(corpus_.size());
}

std::vector<std::size_t> BatchSampler::draw(Phase phase, double xc_ratio, std::size_t count, Rng& rng) const {
  if (!(xc_ratio >= 0 && xc_ratio <= 1)) throw std::invalid_argument("sampler: xc_ratio must lie in [0, 1]");
  std::vector<std::size_t> out(count);
  if (phase != Phase::Generalization) {
    for (auto& i : out) i = uniform_index(rng, corpus_.size());
    return out;
  }
  const double p = to_centric_probability(xc_ratio);
  if (to_non_centric_.empty() && p < 1.0)
    throw std::invalid_argument("sampler: no instances with a non-centric target for the generalization phase");
  for (auto& i : out) {
    if (p > 0.0 && bernoulli(rng, p))
      i = to_centric_[uniform_index(rng, to_centric_.size())];
    else
      i = to_non_centric_[uniform_index(rng, to_non_centric_.size())];
  }
  return out;
}

Batch BatchSampler::sample(Phase phase, double xc_ratio, std::size_t count, Rng& rng) const {
  const auto idx = draw(phase, xc_ratio, count, rng);
  std::vector<TaggedExample> examples;
  std::vector<Direction> dirs;
  examples.reserve(count);
  dirs.reserve(count);
  for (auto i : idx) {
    examples.push_back(tagged_[i]);
    dirs.push_back({corpus_.pairs[i].src_lang, corpus_.pairs[i].tgt_lang});
  }
  return make_batch(examples, dirs);
}

}  // namespace offtarget
