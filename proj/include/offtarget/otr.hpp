#pragma once

#include <optional>
#include <span>
#include <vector>

#include "offtarget/corpus.hpp"

namespace offtarget {

/// Detected output languages: bucket i counts language i, the final bucket
/// counts outputs with no majority language.
struct LanguageHistogram {
  std::vector<std::size_t> counts;

  explicit LanguageHistogram(std::size_t num_langs = 0) : counts(num_langs + 1, 0) {}

  std::size_t none_bucket() const { return counts.size() - 1; }
  std::size_t total() const;
  void add(std::optional<int> lang);
  void merge(const LanguageHistogram& other);
  std::vector<double> fractions() const;

  friend bool operator==(const LanguageHistogram&, const LanguageHistogram&) = default;
};

struct OtrStats {
  double otr = 0.0;
  double otr_c = 0.0;
  double otr_src = 0.0;
  std::size_t n = 0;
  LanguageHistogram histogram;
};

LanguageHistogram language_histogram(std::span<const TokenSeq> outputs, const Languages& languages);

/// Off-target ratio and its centric/source parts. Undetectable outputs are
/// off-target. otr_c is 0 when the target itself is centric.
OtrStats compute_otr(std::span<const TokenSeq> outputs, Direction direction,
                     const std::vector<int>& centric_set, const Languages& languages);

OtrStats otr_from_histogram(const LanguageHistogram& histogram, Direction direction,
                            const std::vector<int>& centric_set);

}  // namespace offtarget
