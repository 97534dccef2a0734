#include "offtarget/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offtarget {

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::Supervised: return "supervised";
    case PairKind::Denoising: return "denoising";
    case PairKind::Noisy: return "noisy";
  }
  return "supervised";
}

PairKind pair_kind_from_string(const std::string& text) {
  if (text == "supervised") return PairKind::Supervised;
  if (text == "denoising") return PairKind::Denoising;
  if (text == "noisy") return PairKind::Noisy;
  throw std::invalid_argument("unknown pair kind '" + text + "'");
}

void SamplingParams::validate() const {
  if (!(zipf_s >= 0.0) || !std::isfinite(zipf_s))
    throw std::invalid_argument("zipf exponent must be a finite value >= 0");
  if (min_len < 1) throw std::invalid_argument("min_len must be >= 1");
  if (max_len < min_len) throw std::invalid_argument("max_len must be >= min_len");
}

bool CorpusSpec::is_centric(int lang) const {
  return std::find(centric_set.begin(), centric_set.end(), lang) != centric_set.end();
}

void CorpusSpec::validate() const {
  validate_languages(languages);
  sampling.validate();
  if (centric_set.empty()) throw std::invalid_argument("centric set must be nonempty");
  const int n = static_cast<int>(languages.size());
  for (int c : centric_set) {
    if (c < 0 || c >= n) throw std::invalid_argument("centric language out of range");
  }
  std::set<int> unique(centric_set.begin(), centric_set.end());
  if (unique.size() != centric_set.size())
    throw std::invalid_argument("centric set has duplicates");
  if (!(target_in_source_noise >= 0.0 && target_in_source_noise <= 1.0))
    throw std::invalid_argument("noise probability must be in [0, 1]");
  for (const auto& [dir, count] : pair_sizes) {
    if (dir.src < 0 || dir.src >= n || dir.tgt < 0 || dir.tgt >= n)
      throw std::invalid_argument("pair references an unknown language");
    if (dir.src == dir.tgt) throw std::invalid_argument("parallel pair must cross languages");
    if (!is_centric(dir.src) && !is_centric(dir.tgt))
      throw std::invalid_argument("pair (" + std::to_string(dir.src) + ", " +
                                  std::to_string(dir.tgt) +
                                  ") involves no centric language");
  }
}

std::map<Direction, std::size_t> centric_pair_sizes(int num_langs,
                                                    const std::vector<int>& centric_set,
                                                    std::size_t size) {
  auto centric = [&](int l) {
    return std::find(centric_set.begin(), centric_set.end(), l) != centric_set.end();
  };
  std::map<Direction, std::size_t> sizes;
  for (int s = 0; s < num_langs; ++s) {
    for (int t = 0; t < num_langs; ++t) {
      if (s != t && (centric(s) || centric(t))) sizes[{s, t}] = size;
    }
  }
  return sizes;
}

std::map<Direction, std::size_t> ParallelCorpus::direction_counts() const {
  std::map<Direction, std::size_t> counts;
  for (const auto& p : pairs) ++counts[{p.src_lang, p.tgt_lang}];
  return counts;
}

ConceptSampler::ConceptSampler(int concept_vocab_size, const SamplingParams& params)
    : params_(params) {
  params.validate();
  if (concept_vocab_size < 1) throw std::invalid_argument("empty concept vocabulary");
  cdf_.resize(static_cast<std::size_t>(concept_vocab_size));
  double total = 0.0;
  for (int c = 0; c < concept_vocab_size; ++c) {
    total += std::pow(static_cast<double>(c + 1), -params.zipf_s);
    cdf_[static_cast<std::size_t>(c)] = total;
  }
  for (auto& v : cdf_) v /= total;
  cdf_.back() = 1.0;
}

std::int32_t ConceptSampler::sample_concept(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::int32_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

ConceptSeq ConceptSampler::sample_sentence(Rng& rng) const {
  const auto span = static_cast<std::size_t>(params_.max_len - params_.min_len + 1);
  const auto len = static_cast<std::size_t>(params_.min_len) + uniform_index(rng, span);
  ConceptSeq out(len);
  for (auto& c : out) c = sample_concept(rng);
  return out;
}

ParallelCorpus make_parallel_corpus(const CorpusSpec& spec) {
  spec.validate();
  const int vc = spec.languages.front().concept_vocab_size();
  const ConceptSampler sampler(vc, spec.sampling);

  ParallelCorpus corpus;
  std::size_t total = 0;
  for (const auto& [dir, count] : spec.pair_sizes) total += count;
  corpus.pairs.reserve(total);

  for (const auto& [dir, count] : spec.pair_sizes) {
    // each direction owns its own stream, so sizes of other pairs never shift it
    Rng rng(derive_seed(spec.seed, {0xc0, static_cast<std::uint64_t>(dir.src),
                                    static_cast<std::uint64_t>(dir.tgt)}));
    const auto& src = spec.languages[static_cast<std::size_t>(dir.src)];
    const auto& tgt = spec.languages[static_cast<std::size_t>(dir.tgt)];
    for (std::size_t i = 0; i < count; ++i) {
      SentencePair p;
      p.src_lang = dir.src;
      p.tgt_lang = dir.tgt;
      p.concepts = sampler.sample_sentence(rng);
      p.src_tokens = render(p.concepts, src);
      const bool noisy = spec.target_in_source_noise > 0.0 &&
                         bernoulli(rng, spec.target_in_source_noise);
      if (noisy) {
        p.kind = PairKind::Noisy;
        p.tgt_tokens = render(p.concepts, src);
      } else {
        p.kind = PairKind::Supervised;
        p.tgt_tokens = render(p.concepts, tgt);
      }
      corpus.pairs.push_back(std::move(p));
    }
  }
  return corpus;
}

void NoisingConfig::validate() const {
  if (!(mask_prob >= 0.0 && mask_prob <= 1.0))
    throw std::invalid_argument("mask_prob must be in [0, 1]");
  if (shuffle_window < 1) throw std::invalid_argument("shuffle_window must be >= 1");
}

TokenSeq corrupt(std::span<const Token> tokens, const NoisingConfig& cfg, Rng& rng) {
  cfg.validate();
  TokenSeq out(tokens.begin(), tokens.end());
  for (auto& t : out) {
    if (cfg.mask_prob > 0.0 && bernoulli(rng, cfg.mask_prob)) t = cfg.mask_token;
  }
  if (cfg.shuffle_window > 1) {
    const auto k = static_cast<std::size_t>(cfg.shuffle_window);
    for (std::size_t start = 0; start < out.size(); start += k) {
      const std::size_t len = std::min(k, out.size() - start);
      for (std::size_t i = len - 1; i > 0; --i) {
        std::swap(out[start + i], out[start + uniform_index(rng, i + 1)]);
      }
    }
  }
  return out;
}

ParallelCorpus make_denoising_corpus(const Languages& languages, std::size_t size_per_lang,
                                     const NoisingConfig& cfg, const SamplingParams& sampling,
                                     std::uint64_t seed) {
  if (size_per_lang < 1) throw std::invalid_argument("size_per_lang must be >= 1");
  validate_languages(languages);
  cfg.validate();
  const ConceptSampler sampler(languages.front().concept_vocab_size(), sampling);
  ParallelCorpus corpus;
  corpus.pairs.reserve(languages.size() * size_per_lang);
  for (const auto& lang : languages) {
    Rng rng(derive_seed(seed, {0xde, static_cast<std::uint64_t>(lang.lang_id)}));
    for (std::size_t i = 0; i < size_per_lang; ++i) {
      SentencePair p;
      p.src_lang = p.tgt_lang = lang.lang_id;
      p.kind = PairKind::Denoising;
      p.concepts = sampler.sample_sentence(rng);
      p.tgt_tokens = render(p.concepts, lang);
      p.src_tokens = corrupt(p.tgt_tokens, cfg, rng);
      corpus.pairs.push_back(std::move(p));
    }
  }
  return corpus;
}

void check_pair(const SentencePair& pair, const Languages& languages) {
  const int n = static_cast<int>(languages.size());
  if (pair.src_lang < 0 || pair.src_lang >= n || pair.tgt_lang < 0 || pair.tgt_lang >= n)
    throw std::invalid_argument("pair references an unknown language");
  const auto& src = languages[static_cast<std::size_t>(pair.src_lang)];
  const auto& tgt = languages[static_cast<std::size_t>(pair.tgt_lang)];
  switch (pair.kind) {
    case PairKind::Supervised:
      if (parse(pair.src_tokens, src) != pair.concepts || parse(pair.tgt_tokens, tgt) != pair.concepts)
        throw std::invalid_argument("supervised pair does not parse to its concepts");
      break;
    case PairKind::Noisy:
      for (Token t : pair.tgt_tokens) {
        if (!src.owns(t)) throw std::invalid_argument("noisy pair target is not in the source language");
      }
      break;
    case PairKind::Denoising:
      if (pair.src_lang != pair.tgt_lang)
        throw std::invalid_argument("denoising pair must stay within one language");
      if (pair.tgt_tokens != render(pair.concepts, tgt))
        throw std::invalid_argument("denoising target is not the rendered sentence");
      for (Token t : pair.src_tokens) {
        if (t != Specials::kMask && !src.owns(t))
          throw std::invalid_argument("corrupted source leaves the language alphabet");
      }
      break;
  }
}

std::string to_string(TaggingScheme scheme) {
  return scheme == TaggingScheme::SrcTgtTags ? "src_tgt_tags" : "t_enc";
}

TaggingScheme tagging_scheme_from_string(const std::string& text) {
  if (text == "src_tgt_tags") return TaggingScheme::SrcTgtTags;
  if (text == "t_enc") return TaggingScheme::TEnc;
  throw std::invalid_argument("unknown tagging scheme '" + text + "'");
}

TaggedExample apply_tags(const SentencePair& pair, TaggingScheme scheme) {
  TaggedExample ex;
  const Token src_tag = tag_token_for(pair.src_lang);
  const Token tgt_tag = tag_token_for(pair.tgt_lang);

  ex.encoder_input.reserve(pair.src_tokens.size() + 2);
  ex.encoder_input.push_back(scheme == TaggingScheme::SrcTgtTags ? src_tag : tgt_tag);
  ex.encoder_input.insert(ex.encoder_input.end(), pair.src_tokens.begin(), pair.src_tokens.end());
  ex.encoder_input.push_back(Specials::kEos);

  ex.decoder_input.reserve(pair.tgt_tokens.size() + 1);
  ex.decoder_input.push_back(scheme == TaggingScheme::SrcTgtTags ? tgt_tag : Specials::kBos);
  ex.decoder_input.insert(ex.decoder_input.end(), pair.tgt_tokens.begin(), pair.tgt_tokens.end());

  ex.decoder_target.assign(pair.tgt_tokens.begin(), pair.tgt_tokens.end());
  ex.decoder_target.push_back(Specials::kEos);
  return ex;
}

}  // namespace offtarget
