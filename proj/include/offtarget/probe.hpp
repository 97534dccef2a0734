#pragma once

#include <string>
#include <vector>

#include "offtarget/evaluate.hpp"

namespace offtarget {

/// Which target tag the probe supplies. None drops the tag: under SrcTgtTags
/// the decoder starts from BOS, under TEnc the encoder input carries no tag.
struct TagCondition {
  enum class Kind { None, SourceTag, Tag };
  Kind kind = Kind::None;
  int lang = -1;  // for Kind::Tag

  static TagCondition none() { return {Kind::None, -1}; }
  static TagCondition source_tag() { return {Kind::SourceTag, -1}; }
  static TagCondition tag(int lang) { return {Kind::Tag, lang}; }

  /// Language whose tag is used for a given source, or -1.
  int tag_language(int src_lang) const;
  std::string label() const;

  friend bool operator==(const TagCondition&, const TagCondition&) = default;
};

/// None, the source tag, then every other language's tag.
std::vector<TagCondition> default_conditions(int src_lang, int num_langs);

TranslationRequest make_probe_request(const ConceptSeq& concepts, int src_lang, TagCondition condition,
                                      const Languages& languages, TaggingScheme scheme);

struct ProbeRow {
  TagCondition condition;
  LanguageHistogram histogram;
  // fraction of outputs per language, with the no-majority bucket last
  std::vector<double> distribution;
};

struct ProbeReport {
  int src_lang = 0;
  std::size_t inputs = 0;
  std::vector<ProbeRow> rows;

  /// Share of outputs in the source language under the given condition.
  double source_share(const TagCondition& condition) const;
};

ProbeReport tag_probe(const Translator& translator, const std::vector<ConceptSeq>& inputs, int src_lang,
                      const std::vector<TagCondition>& conditions, const Languages& languages,
                      TaggingScheme scheme);

template <typename T>
ProbeReport tag_probe(const Parameters<T>& params, const ModelConfig& config, TaggingScheme scheme,
                      const std::vector<ConceptSeq>& inputs, int src_lang,
                      const std::vector<TagCondition>& conditions, const Languages& languages) {
  const ModelTranslator<T> translator(params, config);
  return tag_probe(translator, inputs, src_lang, conditions, languages, scheme);
}

}  // namespace offtarget
