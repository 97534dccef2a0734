#pragma once

#include <span>
#include <vector>

#include "offtarget/corpus.hpp"
#include "offtarget/decode.hpp"
#include "offtarget/multiway.hpp"
#include "offtarget/otr.hpp"

namespace offtarget {

/// One decoding job. `tgt_lang` is the language the tags request, or -1 when
/// no target tag is given. `concepts` is the meaning behind the source and is
/// there only for oracle stubs.
struct TranslationRequest {
  int src_lang = 0;
  int tgt_lang = 0;
  TokenSeq encoder_input;
  Token first_token = Specials::kBos;
  const ConceptSeq* concepts = nullptr;
};

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::vector<TokenSeq> translate(std::span<const TranslationRequest> requests) const = 0;
};

/// Greedy decoding with a trained model, in chunks of `batch_size` requests.
template <typename T>
class ModelTranslator final : public Translator {
 public:
  ModelTranslator(const Parameters<T>& params, const ModelConfig& config, int batch_size = 64)
      : params_(params), config_(config), batch_size_(batch_size) {}

  std::vector<TokenSeq> translate(std::span<const TranslationRequest> requests) const override;

 private:
  const Parameters<T>& params_;
  const ModelConfig& config_;
  int batch_size_;
};

/// Builds the tagged request for translating `concepts` from src to tgt.
TranslationRequest make_request(const ConceptSeq& concepts, Direction direction,
                                const Languages& languages, TaggingScheme scheme);

struct DirectionReport {
  Direction direction;
  bool supervised = false;
  double bleu = 0.0;
  OtrStats otr;
};

struct EvalReport {
  std::vector<DirectionReport> directions;
  double sup_bleu = 0.0;
  double sup_bleu_to_centric = 0.0;
  double sup_bleu_from_centric = 0.0;
  double zs_bleu = 0.0;
  // zero-shot off-target ratios, macro-averaged over directions
  double zs_otr = 0.0;
  double zs_otr_c = 0.0;
  double zs_otr_src = 0.0;
  // the same ratios pooled over all zero-shot outputs
  double zs_otr_micro = 0.0;
  double zs_otr_c_micro = 0.0;
  double zs_otr_src_micro = 0.0;
  std::size_t rows = 0;
  bool has_zero_shot = false;

  const DirectionReport& at(Direction d) const;
};

/// A direction is supervised when either endpoint is centric.
bool is_supervised(Direction d, const std::vector<int>& centric_set);

/// Decodes every ordered pair of distinct languages over the multiway rows.
EvalReport evaluate(const Translator& translator, const MultiwayTestSet& testset,
                    const Languages& languages, const std::vector<int>& centric_set,
                    TaggingScheme scheme);

template <typename T>
EvalReport evaluate(const Parameters<T>& params, const ModelConfig& config, TaggingScheme scheme,
                    const MultiwayTestSet& testset, const Languages& languages,
                    const std::vector<int>& centric_set) {
  const ModelTranslator<T> translator(params, config);
  return evaluate(translator, testset, languages, centric_set, scheme);
}

/// Emits the reference translation for every request.
class OracleTranslator final : public Translator {
 public:
  explicit OracleTranslator(const Languages& languages) : languages_(languages) {}
  std::vector<TokenSeq> translate(std::span<const TranslationRequest> requests) const override;

 private:
  const Languages& languages_;
};

/// Always answers in one fixed language.
class FixedLanguageTranslator final : public Translator {
 public:
  FixedLanguageTranslator(const Languages& languages, int lang) : languages_(languages), lang_(lang) {}
  std::vector<TokenSeq> translate(std::span<const TranslationRequest> requests) const override;

 private:
  const Languages& languages_;
  int lang_;
};

}  // namespace offtarget
