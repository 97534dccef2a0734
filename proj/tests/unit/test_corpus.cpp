#include <cmath>
#include <sstream>

#include "doctest.h"
#include "offtarget/corpus.hpp"
#include "offtarget/corpus_io.hpp"

using namespace offtarget;

namespace {

Languages six_languages(std::uint64_t seed = 11, int vc = 128) {
  std::vector<OrderRule> rules;
  for (int i = 0; i < 6; ++i) rules.push_back(i % 2 ? OrderRule::reverse_window(3) : OrderRule::identity());
  return build_languages(6, vc, rules, seed);
}

CorpusSpec single_centric(std::size_t per_pair, double noise = 0.0) {
  CorpusSpec spec;
  spec.languages = six_languages();
  spec.centric_set = {0};
  spec.pair_sizes = centric_pair_sizes(6, spec.centric_set, per_pair);
  spec.target_in_source_noise = noise;
  spec.seed = 2024;
  return spec;
}

}  // namespace

TEST_CASE("clean corpus satisfies the supervised and translation oracles") {
  const auto spec = single_centric(200);
  const auto corpus = make_parallel_corpus(spec);
  CHECK(corpus.size() == 10 * 200);
  for (const auto& p : corpus.pairs) {
    REQUIRE(p.kind == PairKind::Supervised);
    REQUIRE_NOTHROW(check_pair(p, spec.languages));
    const auto& s = spec.languages[static_cast<std::size_t>(p.src_lang)];
    const auto& t = spec.languages[static_cast<std::size_t>(p.tgt_lang)];
    REQUIRE(render(parse(p.src_tokens, s), t) == p.tgt_tokens);
    REQUIRE(p.concepts.size() >= 4);
    REQUIRE(p.concepts.size() <= 12);
  }
  for (const auto& [dir, n] : corpus.direction_counts()) {
    CHECK((dir.src == 0 || dir.tgt == 0));
    CHECK(n == 200);
  }
}

TEST_CASE("noise rate one renders every target in the source language") {
  const auto spec = single_centric(50, 1.0);
  for (const auto& p : make_parallel_corpus(spec).pairs) {
    REQUIRE(p.kind == PairKind::Noisy);
    for (Token t : p.tgt_tokens) REQUIRE(spec.languages[static_cast<std::size_t>(p.src_lang)].owns(t));
  }
}

TEST_CASE("noisy fraction follows the configured rate") {
  auto spec = single_centric(10000, 0.058);
  const auto corpus = make_parallel_corpus(spec);
  REQUIRE(corpus.size() == 100000);
  std::size_t noisy = 0;
  for (const auto& p : corpus.pairs) noisy += p.kind == PairKind::Noisy;
  const double frac = static_cast<double>(noisy) / static_cast<double>(corpus.size());
  CHECK(std::abs(frac - 0.058) <= 0.005);
}

TEST_CASE("corpus generation is a pure function of the spec") {
  const auto spec = single_centric(30, 0.1);
  CHECK(make_parallel_corpus(spec).pairs == make_parallel_corpus(spec).pairs);
  auto other = spec;
  other.seed += 1;
  CHECK(make_parallel_corpus(spec).pairs != make_parallel_corpus(other).pairs);
}

TEST_CASE("spec validation rejects pairs without a centric language") {
  auto spec = single_centric(10);
  spec.pair_sizes[{1, 2}] = 5;
  CHECK_THROWS_AS(make_parallel_corpus(spec), std::invalid_argument);
  auto empty_centric = single_centric(10);
  empty_centric.centric_set.clear();
  CHECK_THROWS_AS(empty_centric.validate(), std::invalid_argument);
  auto bad_len = single_centric(10);
  bad_len.sampling.min_len = 0;
  CHECK_THROWS_AS(bad_len.validate(), std::invalid_argument);
}

TEST_CASE("multi-centric pair sets include centric-centric directions") {
  const auto sizes = centric_pair_sizes(4, {0, 1}, 10);
  CHECK(sizes.count({0, 1}) == 1);
  CHECK(sizes.count({1, 0}) == 1);
  CHECK(sizes.count({2, 3}) == 0);
  CHECK(sizes.size() == 10);
}

TEST_CASE("concept sampler follows the Zipf law") {
  SamplingParams params;
  params.zipf_s = 1.2;
  const ConceptSampler sampler(50, params);
  Rng rng(5);
  std::vector<double> counts(50, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sampler.sample_concept(rng))] += 1.0;
  double z = 0.0;
  for (int c = 0; c < 50; ++c) z += std::pow(c + 1.0, -1.2);
  for (int c : {0, 1, 4, 20}) {
    const double p = std::pow(c + 1.0, -1.2) / z;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(counts[static_cast<std::size_t>(c)] - n * p) <= 4 * sigma);
  }
}

TEST_CASE("corrupt identity and full masking") {
  Rng rng(1);
  const TokenSeq in{20, 21, 22, 23, 24};
  NoisingConfig none{0.0, 1, Specials::kMask};
  CHECK(corrupt(in, none, rng) == in);
  NoisingConfig all{1.0, 1, Specials::kMask};
  for (Token t : corrupt(in, all, rng)) CHECK(t == Specials::kMask);
}

TEST_CASE("corrupt masks at the configured rate and keeps the alphabet") {
  const auto langs = six_languages();
  const ConceptSampler sampler(128, SamplingParams{});
  Rng rng(77);
  NoisingConfig cfg{0.35, 3, Specials::kMask};
  std::size_t total = 0;
  std::size_t masked = 0;
  while (total < 100000) {
    const auto& lang = langs[uniform_index(rng, langs.size())];
    const auto clean = render(sampler.sample_sentence(rng), lang);
    const auto noisy = corrupt(clean, cfg, rng);
    REQUIRE(noisy.size() == clean.size());
    for (Token t : noisy) {
      REQUIRE((t == Specials::kMask || lang.owns(t)));
      masked += t == Specials::kMask;
    }
    total += noisy.size();
  }
  CHECK(std::abs(static_cast<double>(masked) / static_cast<double>(total) - 0.35) <= 0.01);
}

TEST_CASE("corrupt only reorders within windows") {
  Rng rng(4);
  NoisingConfig cfg{0.0, 3, Specials::kMask};
  const TokenSeq in{10, 11, 12, 13, 14, 15, 16};
  for (int trial = 0; trial < 200; ++trial) {
    const auto out = corrupt(in, cfg, rng);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE((out[i] - 10) / 3 == static_cast<int>(i) / 3);
  }
}

TEST_CASE("denoising corpus layout") {
  const auto langs = six_languages();
  const std::vector<LanguageSpec> three(langs.begin(), langs.begin() + 3);
  const auto identity_cfg = NoisingConfig{0.0, 1, Specials::kMask};
  Languages sub = three;
  const auto clean = make_denoising_corpus(sub, 10, identity_cfg, SamplingParams{}, 1);
  CHECK(clean.size() == 30);
  for (const auto& [dir, n] : clean.direction_counts()) {
    CHECK(dir.src == dir.tgt);
    CHECK(n == 10);
  }
  for (const auto& p : clean.pairs) CHECK(p.src_tokens == p.tgt_tokens);

  const auto noisy = make_denoising_corpus(langs, 50, NoisingConfig{}, SamplingParams{}, 2);
  for (const auto& p : noisy.pairs) {
    REQUIRE(p.kind == PairKind::Denoising);
    REQUIRE_NOTHROW(check_pair(p, langs));
  }
  CHECK_THROWS(make_denoising_corpus(langs, 0, NoisingConfig{}, SamplingParams{}, 2));
}

TEST_CASE("tagging layouts") {
  SentencePair p;
  p.src_lang = 0;
  p.tgt_lang = 1;
  p.src_tokens = {100};
  p.tgt_tokens = {205};
  const Token ta = tag_token_for(0);
  const Token tb = tag_token_for(1);
  const auto st = apply_tags(p, TaggingScheme::SrcTgtTags);
  CHECK(st.encoder_input == TokenSeq{ta, 100, Specials::kEos});
  CHECK(st.decoder_input == TokenSeq{tb, 205});
  CHECK(st.decoder_target == TokenSeq{205, Specials::kEos});
  const auto te = apply_tags(p, TaggingScheme::TEnc);
  CHECK(te.encoder_input == TokenSeq{tb, 100, Specials::kEos});
  CHECK(te.decoder_input == TokenSeq{Specials::kBos, 205});
  CHECK(te.decoder_target == TokenSeq{205, Specials::kEos});
}

TEST_CASE("decoder target is the decoder input shifted left with EOS") {
  const auto corpus = make_parallel_corpus(single_centric(20));
  for (const auto scheme : {TaggingScheme::SrcTgtTags, TaggingScheme::TEnc}) {
    for (const auto& p : corpus.pairs) {
      const auto ex = apply_tags(p, scheme);
      REQUIRE(ex.decoder_input.size() == ex.decoder_target.size());
      for (std::size_t i = 0; i + 1 < ex.decoder_input.size(); ++i)
        REQUIRE(ex.decoder_target[i] == ex.decoder_input[i + 1]);
      REQUIRE(ex.decoder_target.back() == Specials::kEos);
      for (Token t : ex.encoder_input) REQUIRE(t != Specials::kPad);
      for (Token t : ex.decoder_input) REQUIRE(t != Specials::kPad);
    }
  }
}

TEST_CASE("corpus files and registry survive a write/read cycle") {
  const auto spec = single_centric(15, 0.2);
  const auto corpus = make_parallel_corpus(spec);
  std::stringstream buf;
  write_corpus_jsonl(buf, corpus);
  CHECK(read_corpus_jsonl(buf).pairs == corpus.pairs);

  const auto reg = registry_to_json(spec.languages);
  CHECK(reg.at("specials").at("mask") == Specials::kMask);
  CHECK(registry_from_json(reg) == spec.languages);

  std::stringstream line(R"({"src_lang":0,"tgt_lang":1,"src":[-3],"tgt":[9],"concepts":[0],"kind":"supervised"})");
  CHECK_THROWS(read_corpus_jsonl(line));
}
