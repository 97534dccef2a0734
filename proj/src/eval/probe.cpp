#include "offtarget/probe.hpp"

#include <stdexcept>

namespace offtarget {

int TagCondition::tag_language(int src_lang) const {
  switch (kind) {
    case Kind::None:
      return -1;
    case Kind::SourceTag:
      return src_lang;
    case Kind::Tag:
      return lang;
  }
  return -1;
}

std::string TagCondition::label() const {
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::SourceTag:
      return "source_tag";
    case Kind::Tag:
      return "tag_" + std::to_string(lang);
  }
  return "";
}

std::vector<TagCondition> default_conditions(int src_lang, int num_langs) {
  std::vector<TagCondition> out{TagCondition::none(), TagCondition::source_tag()};
  for (int l = 0; l < num_langs; ++l)
    if (l != src_lang) out.push_back(TagCondition::tag(l));
  return out;
}

TranslationRequest make_probe_request(const ConceptSeq& concepts, int src_lang, TagCondition condition,
                                      const Languages& languages, TaggingScheme scheme) {
  const int tag_lang = condition.tag_language(src_lang);
  if (tag_lang >= static_cast<int>(languages.size())) throw std::out_of_range("probe: tag language out of range");
  TranslationRequest r;
  r.src_lang = src_lang;
  r.tgt_lang = tag_lang;
  r.concepts = &concepts;
  const auto src_tokens = render(concepts, languages.at(static_cast<std::size_t>(src_lang)));
  if (scheme == TaggingScheme::SrcTgtTags) {
    r.encoder_input.push_back(tag_token_for(src_lang));
    r.first_token = tag_lang < 0 ? Specials::kBos : tag_token_for(tag_lang);
  } else {
    if (tag_lang >= 0) r.encoder_input.push_back(tag_token_for(tag_lang));
    r.first_token = Specials::kBos;
  }
  r.encoder_input.insert(r.encoder_input.end(), src_tokens.begin(), src_tokens.end());
  r.encoder_input.push_back(Specials::kEos);
  return r;
}

double ProbeReport::source_share(const TagCondition& condition) const {
  for (const auto& row : rows)
    if (row.condition == condition) return row.distribution.at(static_cast<std::size_t>(src_lang));
  throw std::out_of_range("probe condition not in report");
}

ProbeReport tag_probe(const Translator& translator, const std::vector<ConceptSeq>& inputs, int src_lang,
                      const std::vector<TagCondition>& conditions, const Languages& languages,
                      TaggingScheme scheme) {
  if (inputs.empty()) throw std::invalid_argument("probe: no inputs");
  std::vector<TranslationRequest> requests;
  for (const auto& c : conditions)
    for (const auto& row : inputs) requests.push_back(make_probe_request(row, src_lang, c, languages, scheme));
  const auto outputs = translator.translate(requests);
  if (outputs.size() != requests.size()) throw std::runtime_error("translator returned the wrong number of outputs");

  ProbeReport report;
  report.src_lang = src_lang;
  report.inputs = inputs.size();
  for (std::size_t k = 0; k < conditions.size(); ++k) {
    ProbeRow row;
    row.condition = conditions[k];
    row.histogram = language_histogram(std::span<const TokenSeq>(outputs.data() + k * inputs.size(), inputs.size()),
                                       languages);
    row.distribution = row.histogram.fractions();
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace offtarget
