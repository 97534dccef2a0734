#include "doctest.h"
#include "offtarget/decode.hpp"
#include "offtarget/trainer.hpp"
#include "test_support.hpp"

using namespace offtarget;

namespace {

ModelConfig decode_config() {
  auto c = testing::tiny_config(30);
  c.d_model = 16;
  c.num_heads = 4;
  c.ffn_dim = 32;
  c.enc_layers = 2;
  c.dec_layers = 2;
  c.max_len = 10;
  return c;
}

Eigen::Index argmax_lowest(const Matrix<double>& logits, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index v = 1; v < logits.cols(); ++v)
    if (logits(row, v) > logits(row, best)) best = v;
  return best;
}

}  // namespace

TEST_CASE("a model that always prefers EOS decodes to the empty sequence") {
  const auto c = decode_config();
  auto p = Parameters<double>::zeros(c);
  // every decoder state normalizes to the final bias, which points at EOS
  p.data(p.layout.decoder_final.bias)[0] = 1.0;
  p.data(p.layout.embedding)[Specials::kEos * c.d_model] = 1.0;
  CHECK(greedy_decode(p, c, TokenSeq{5, 6, 7, Specials::kEos}, tag_token_for(0), 10).empty());
}

TEST_CASE("all-zero logits break ties toward the lowest id") {
  const auto c = decode_config();
  const auto p = Parameters<double>::zeros(c);
  // token 0 (PAD) wins every tie, so decoding runs to the length limit
  const auto out = greedy_decode(p, c, TokenSeq{5, 6}, Specials::kBos, 4);
  CHECK(out == TokenSeq(4, Specials::kPad));
  CHECK(greedy_decode(p, c, TokenSeq{5, 6}, Specials::kBos, 99).size() == 10);
  CHECK(greedy_decode(p, c, TokenSeq{5, 6}, Specials::kBos, 0).empty());
}

TEST_CASE("decoding is deterministic and batch independent") {
  const auto c = decode_config();
  const auto p = init_params<double>(c, 12);
  Rng rng(4);
  const auto ex = testing::random_examples(7, c.vocab_size, rng, 8);
  std::vector<TokenSeq> inputs;
  std::vector<Token> firsts;
  for (const auto& e : ex) {
    inputs.push_back(e.encoder_input);
    firsts.push_back(e.decoder_input.front());
  }
  const auto a = greedy_decode(p, c, std::span<const TokenSeq>(inputs), std::span<const Token>(firsts), 10);
  const auto b = greedy_decode(p, c, std::span<const TokenSeq>(inputs), std::span<const Token>(firsts), 10);
  CHECK(a == b);
  for (std::size_t i = 0; i < inputs.size(); ++i) CHECK(greedy_decode(p, c, inputs[i], firsts[i], 10) == a[i]);
}

TEST_CASE("incremental decoding agrees with the teacher-forced forward pass") {
  const auto c = decode_config();
  const auto p = init_params<double>(c, 21);
  Rng rng(9);
  for (const auto& e : testing::random_examples(10, c.vocab_size, rng, 8)) {
    const Token first = e.decoder_input.front();
    const auto out = greedy_decode(p, c, e.encoder_input, first, c.max_len);
    TaggedExample forced;
    forced.encoder_input = e.encoder_input;
    forced.decoder_input = {first};
    forced.decoder_input.insert(forced.decoder_input.end(), out.begin(), out.end());
    if (static_cast<int>(forced.decoder_input.size()) > c.max_len) forced.decoder_input.pop_back();
    forced.decoder_target.assign(forced.decoder_input.size(), Specials::kEos);
    const TaggedExample one[] = {forced};
    const auto logits = forward(p, c, make_batch(one), false, nullptr);
    for (int t = 0; t < static_cast<int>(forced.decoder_input.size()); ++t) {
      const Token expect = t < static_cast<int>(out.size()) ? out[static_cast<std::size_t>(t)] : Specials::kEos;
      REQUIRE(argmax_lowest(logits.values, t) == expect);
    }
  }
}

TEST_CASE("a model overfit on 200 pairs reproduces its training targets") {
  const std::vector<OrderRule> rules{OrderRule::identity(), OrderRule::reverse_window(3)};
  CorpusSpec spec;
  spec.languages = build_languages(2, 24, rules, 3);
  spec.centric_set = {0};
  spec.pair_sizes = centric_pair_sizes(2, {0}, 100);
  spec.sampling.min_len = 3;
  spec.sampling.max_len = 6;
  spec.seed = 11;
  const auto corpus = make_parallel_corpus(spec);
  REQUIRE(corpus.size() == 200);

  ModelConfig c;
  c.vocab_size = vocab_size(spec.languages);
  c.d_model = 32;
  c.num_heads = 4;
  c.ffn_dim = 64;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.max_len = 12;
  c.dropout_prob = 0.0;
  TrainSchedule s;
  s.total_steps = 1200;
  s.gen_steps = 0;
  s.batch_size = 32;
  s.warmup_steps = 100;
  s.peak_lr = 3e-3;
  s.label_smoothing = 0.0;
  s.eval_every = 1200;
  s.seed = 5;
  auto sampler = std::make_shared<const BatchSampler>(corpus, spec.centric_set, TaggingScheme::SrcTgtTags);
  Trainer<float> trainer(c, s, sampler, init_params<float>(c, 6));
  trainer.run();

  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const auto& pair = corpus.pairs[static_cast<std::size_t>(2 * i)];
    const auto ex = apply_tags(pair, TaggingScheme::SrcTgtTags);
    exact += greedy_decode(trainer.params(), c, ex.encoder_input, ex.decoder_input.front(), c.max_len) == pair.tgt_tokens;
  }
  MESSAGE("exact reproductions: " << exact << "/100");
  CHECK(exact >= 95);
}
