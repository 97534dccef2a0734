#include "offtarget/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "offtarget/bleu.hpp"

namespace offtarget {

template <typename T>
std::vector<TokenSeq> ModelTranslator<T>::translate(std::span<const TranslationRequest> requests) const {
  std::vector<TokenSeq> out;
  out.reserve(requests.size());
  const auto chunk = static_cast<std::size_t>(std::max(1, batch_size_));
  for (std::size_t start = 0; start < requests.size(); start += chunk) {
    const auto end = std::min(requests.size(), start + chunk);
    std::vector<TokenSeq> inputs;
    std::vector<Token> firsts;
    for (std::size_t i = start; i < end; ++i) {
      inputs.push_back(requests[i].encoder_input);
      firsts.push_back(requests[i].first_token);
    }
    auto decoded = greedy_decode(params_, config_, std::span<const TokenSeq>(inputs),
                                 std::span<const Token>(firsts), config_.max_len);
    for (auto& d : decoded) out.push_back(std::move(d));
  }
  return out;
}

template class ModelTranslator<float>;
template class ModelTranslator<double>;

TranslationRequest make_request(const ConceptSeq& concepts, Direction direction,
                                const Languages& languages, TaggingScheme scheme) {
  SentencePair pair;
  pair.src_lang = direction.src;
  pair.tgt_lang = direction.tgt;
  pair.src_tokens = render(concepts, languages.at(static_cast<std::size_t>(direction.src)));
  const auto tagged = apply_tags(pair, scheme);
  TranslationRequest r;
  r.src_lang = direction.src;
  r.tgt_lang = direction.tgt;
  r.encoder_input = tagged.encoder_input;
  r.first_token = tagged.decoder_input.front();
  r.concepts = &concepts;
  return r;
}

bool is_supervised(Direction d, const std::vector<int>& centric_set) {
  const auto centric = [&](int l) { return std::find(centric_set.begin(), centric_set.end(), l) != centric_set.end(); };
  return centric(d.src) || centric(d.tgt);
}

const DirectionReport& EvalReport::at(Direction d) const {
  for (const auto& r : directions)
    if (r.direction == d) return r;
  throw std::out_of_range("direction not in report");
}

EvalReport evaluate(const Translator& translator, const MultiwayTestSet& testset,
                    const Languages& languages, const std::vector<int>& centric_set,
                    TaggingScheme scheme) {
  if (testset.rows.empty()) throw std::invalid_argument("evaluate: empty test set");
  const int L = static_cast<int>(languages.size());
  EvalReport report;
  report.rows = testset.size();

  std::vector<TranslationRequest> requests;
  std::vector<Direction> order;
  for (int s = 0; s < L; ++s)
    for (int t = 0; t < L; ++t) {
      if (s == t) continue;
      order.push_back({s, t});
      for (const auto& row : testset.rows) requests.push_back(make_request(row, {s, t}, languages, scheme));
    }
  const auto outputs = translator.translate(requests);
  if (outputs.size() != requests.size()) throw std::runtime_error("translator returned the wrong number of outputs");

  const std::size_t n = testset.size();
  double sup_sum = 0, to_c = 0, from_c = 0, zs_sum = 0;
  int sup_n = 0, to_c_n = 0, from_c_n = 0, zs_n = 0;
  double otr = 0, otr_c = 0, otr_src = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Direction d = order[k];
    const std::span<const TokenSeq> hyps(outputs.data() + k * n, n);
    std::vector<TokenSeq> refs;
    refs.reserve(n);
    for (const auto& row : testset.rows) refs.push_back(render(row, languages[static_cast<std::size_t>(d.tgt)]));

    DirectionReport r;
    r.direction = d;
    r.supervised = is_supervised(d, centric_set);
    r.bleu = corpus_bleu(hyps, refs);
    r.otr = compute_otr(hyps, d, centric_set, languages);
    if (r.supervised) {
      sup_sum += r.bleu;
      ++sup_n;
      const bool tc = std::find(centric_set.begin(), centric_set.end(), d.tgt) != centric_set.end();
      const bool sc = std::find(centric_set.begin(), centric_set.end(), d.src) != centric_set.end();
      if (tc) to_c += r.bleu, ++to_c_n;
      if (sc) from_c += r.bleu, ++from_c_n;
    } else {
      zs_sum += r.bleu;
      ++zs_n;
      otr += r.otr.otr;
      otr_c += r.otr.otr_c;
      otr_src += r.otr.otr_src;
    }
    report.directions.push_back(std::move(r));
  }

  if (sup_n) report.sup_bleu = sup_sum / sup_n;
  if (to_c_n) report.sup_bleu_to_centric = to_c / to_c_n;
  if (from_c_n) report.sup_bleu_from_centric = from_c / from_c_n;
  report.has_zero_shot = zs_n > 0;
  if (zs_n) {
    report.zs_bleu = zs_sum / zs_n;
    report.zs_otr = otr / zs_n;
    report.zs_otr_c = otr_c / zs_n;
    report.zs_otr_src = otr_src / zs_n;
    // pooled counts over zero-shot directions
    double off = 0, cen = 0, src = 0;
    std::size_t total = 0;
    for (const auto& r : report.directions) {
      if (r.supervised) continue;
      off += r.otr.otr * static_cast<double>(r.otr.n);
      cen += r.otr.otr_c * static_cast<double>(r.otr.n);
      src += r.otr.otr_src * static_cast<double>(r.otr.n);
      total += r.otr.n;
    }
    report.zs_otr_micro = off / static_cast<double>(total);
    report.zs_otr_c_micro = cen / static_cast<double>(total);
    report.zs_otr_src_micro = src / static_cast<double>(total);
  }
  return report;
}

std::vector<TokenSeq> OracleTranslator::translate(std::span<const TranslationRequest> requests) const {
  std::vector<TokenSeq> out;
  for (const auto& r : requests) {
    if (!r.concepts) throw std::invalid_argument("oracle translator needs the request concepts");
    const int lang = r.tgt_lang < 0 ? r.src_lang : r.tgt_lang;
    out.push_back(render(*r.concepts, languages_.at(static_cast<std::size_t>(lang))));
  }
  return out;
}

std::vector<TokenSeq> FixedLanguageTranslator::translate(std::span<const TranslationRequest> requests) const {
  std::vector<TokenSeq> out;
  for (const auto& r : requests) {
    if (!r.concepts) throw std::invalid_argument("fixed-language translator needs the request concepts");
    out.push_back(render(*r.concepts, languages_.at(static_cast<std::size_t>(lang_))));
  }
  return out;
}

}  // namespace offtarget
