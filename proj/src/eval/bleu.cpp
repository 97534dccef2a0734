#include "offtarget/bleu.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace offtarget {

namespace {

constexpr int kMaxOrder = 4;

using NgramCounts = std::map<std::vector<Token>, int>;

NgramCounts count_ngrams(const TokenSeq& seq, int n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= seq.size(); ++i)
    ++counts[std::vector<Token>(seq.begin() + static_cast<std::ptrdiff_t>(i),
                                seq.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  return counts;
}

}  // namespace

double corpus_bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references) {
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty corpus");
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("bleu: hypothesis and reference counts differ");

  std::array<double, kMaxOrder> matches{};
  std::array<double, kMaxOrder> totals{};
  double hyp_len = 0;
  double ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(ref.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
      if (hyp.size() < static_cast<std::size_t>(n)) continue;
      totals[n - 1] += static_cast<double>(hyp.size() - static_cast<std::size_t>(n) + 1);
      const auto ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : count_ngrams(hyp, n)) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_precision = 0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_precision += std::log(matches[n] / totals[n]);
  }
  const double brevity = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return 100.0 * brevity * std::exp(log_precision / kMaxOrder);
}

}  // namespace offtarget
