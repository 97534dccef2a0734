#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "offtarget/language.hpp"
#include "offtarget/rng.hpp"

namespace offtarget {

enum class PairKind { Supervised, Denoising, Noisy };

std::string to_string(PairKind kind);
PairKind pair_kind_from_string(const std::string& text);

struct SentencePair {
  int src_lang = 0;
  int tgt_lang = 0;
  TokenSeq src_tokens;
  TokenSeq tgt_tokens;
  ConceptSeq concepts;
  PairKind kind = PairKind::Supervised;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct Direction {
  int src = 0;
  int tgt = 0;
  friend auto operator<=>(const Direction&, const Direction&) = default;
};

/// Sentence statistics shared by every generator.
struct SamplingParams {
  double zipf_s = 1.2;
  int min_len = 4;
  int max_len = 12;

  void validate() const;
};

struct CorpusSpec {
  Languages languages;
  std::vector<int> centric_set;
  std::map<Direction, std::size_t> pair_sizes;
  SamplingParams sampling;
  double target_in_source_noise = 0.0;
  std::uint64_t seed = 0;

  bool is_centric(int lang) const;
  void validate() const;
};

/// Every (centric, X) and (X, centric) direction with `size` pairs each,
/// including centric-centric directions when several languages are centric.
std::map<Direction, std::size_t> centric_pair_sizes(int num_langs,
                                                    const std::vector<int>& centric_set,
                                                    std::size_t size);

struct ParallelCorpus {
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::map<Direction, std::size_t> direction_counts() const;
};

/// Samples concept ids from a Zipf law over [0, V) and lengths uniformly.
class ConceptSampler {
 public:
  ConceptSampler(int concept_vocab_size, const SamplingParams& params);

  std::int32_t sample_concept(Rng& rng) const;
  ConceptSeq sample_sentence(Rng& rng) const;

 private:
  std::vector<double> cdf_;
  SamplingParams params_;
};

ParallelCorpus make_parallel_corpus(const CorpusSpec& spec);

struct NoisingConfig {
  double mask_prob = 0.35;
  int shuffle_window = 3;
  Token mask_token = Specials::kMask;

  void validate() const;
};

TokenSeq corrupt(std::span<const Token> tokens, const NoisingConfig& cfg, Rng& rng);

ParallelCorpus make_denoising_corpus(const Languages& languages, std::size_t size_per_lang,
                                     const NoisingConfig& cfg, const SamplingParams& sampling,
                                     std::uint64_t seed);

/// Throws std::invalid_argument when a pair breaks the invariant of its kind.
void check_pair(const SentencePair& pair, const Languages& languages);

enum class TaggingScheme { SrcTgtTags, TEnc };

std::string to_string(TaggingScheme scheme);
TaggingScheme tagging_scheme_from_string(const std::string& text);

struct TaggedExample {
  TokenSeq encoder_input;
  TokenSeq decoder_input;
  TokenSeq decoder_target;
};

TaggedExample apply_tags(const SentencePair& pair, TaggingScheme scheme);

}  // namespace offtarget
