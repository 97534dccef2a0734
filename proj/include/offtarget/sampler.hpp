#pragma once

#include <memory>
#include <vector>

#include "offtarget/batch.hpp"
#include "offtarget/corpus.hpp"
#include "offtarget/rng.hpp"
#include "offtarget/schedule.hpp"

namespace offtarget {

/// Draws training instances with replacement.
///
/// Standard phase: uniform over the corpus. Generalization phase: an instance
/// whose target is centric is drawn with total probability r * M_c / M,
/// where M_c counts such instances and M the whole corpus, so each of them
/// keeps r times its standard-phase frequency. The remaining mass is spread
/// uniformly over instances with a non-centric target.
class BatchSampler {
 public:
  BatchSampler(ParallelCorpus corpus, std::vector<int> centric_set, TaggingScheme scheme);

  std::vector<std::size_t> draw(Phase phase, double xc_ratio, std::size_t count, Rng& rng) const;
  Batch sample(Phase phase, double xc_ratio, std::size_t count, Rng& rng) const;

  /// Probability that one generalization-phase draw has a centric target.
  double to_centric_probability(double xc_ratio) const;

  const ParallelCorpus& corpus() const { return corpus_; }
  const std::vector<int>& centric_set() const { return centric_; }
  TaggingScheme scheme() const { return scheme_; }
  const std::vector<std::size_t>& to_centric() const { return to_centric_; }
  const std::vector<std::size_t>& to_non_centric() const { return to_non_centric_; }

 private:
  ParallelCorpus corpus_;
  std::vector<int> centric_;
  TaggingScheme scheme_;
  std::vector<TaggedExample> tagged_;
  std::vector<std::size_t> to_centric_;
  std::vector<std::size_t> to_non_centric_;
};

}  // namespace offtarget
