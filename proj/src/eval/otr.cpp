#include "offtarget/otr.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace offtarget {

std::size_t LanguageHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void LanguageHistogram::add(std::optional<int> lang) {
  if (!lang) {
    ++counts[none_bucket()];
    return;
  }
  if (*lang < 0 || static_cast<std::size_t>(*lang) >= none_bucket())
    throw std::out_of_range("histogram: language id out of range");
  ++counts[static_cast<std::size_t>(*lang)];
}

void LanguageHistogram::merge(const LanguageHistogram& other) {
  if (other.counts.size() != counts.size()) throw std::invalid_argument("histogram size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

std::vector<double> LanguageHistogram::fractions() const {
  std::vector<double> out(counts.size(), 0.0);
  const auto n = total();
  if (n == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return out;
}

LanguageHistogram language_histogram(std::span<const TokenSeq> outputs, const Languages& languages) {
  LanguageHistogram h(languages.size());
  for (const auto& out : outputs) h.add(detect_language(out, languages));
  return h;
}

OtrStats otr_from_histogram(const LanguageHistogram& histogram, Direction direction,
                            const std::vector<int>& centric_set) {
  const auto n = histogram.total();
  if (n == 0) throw std::invalid_argument("otr: no outputs");
  const auto num_langs = static_cast<int>(histogram.none_bucket());
  if (direction.src < 0 || direction.src >= num_langs || direction.tgt < 0 || direction.tgt >= num_langs)
    throw std::out_of_range("otr: direction outside the language set");
  const auto count = [&](int lang) { return static_cast<double>(histogram.counts[static_cast<std::size_t>(lang)]); };
  const bool tgt_centric = std::find(centric_set.begin(), centric_set.end(), direction.tgt) != centric_set.end();
  const double total = static_cast<double>(n);

  OtrStats s;
  s.n = n;
  s.histogram = histogram;
  s.otr = (total - count(direction.tgt)) / total;
  if (!tgt_centric) {
    double c = 0;
    for (int lang : centric_set) c += count(lang);
    s.otr_c = c / total;
  }
  s.otr_src = direction.src == direction.tgt ? 0.0 : count(direction.src) / total;
  return s;
}

OtrStats compute_otr(std::span<const TokenSeq> outputs, Direction direction,
                     const std::vector<int>& centric_set, const Languages& languages) {
  if (outputs.empty()) throw std::invalid_argument("otr: no outputs");
  return otr_from_histogram(language_histogram(outputs, languages), direction, centric_set);
}

}  // namespace offtarget
