#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "offtarget/bleu.hpp"
#include "offtarget/csv.hpp"
#include "offtarget/evaluate.hpp"
#include "offtarget/probe.hpp"
#include "offtarget/report_io.hpp"

using namespace offtarget;

namespace {

Languages make_langs(int n = 4, int vc = 64) {
  std::vector<OrderRule> rules;
  for (int i = 0; i < n; ++i) rules.push_back(i % 2 ? OrderRule::reverse_window(3) : OrderRule::identity());
  return build_languages(n, vc, rules, 5);
}

MultiwayTestSet small_set(const Languages& langs, std::size_t n = 20) {
  return make_multiway_set(langs.front().concept_vocab_size(), SamplingParams{}, n, 77, {});
}

}  // namespace

TEST_CASE("bleu identity, disjoint and hand-computed cases") {
  const std::vector<TokenSeq> refs{{1, 2, 3, 4, 5}, {6, 7, 8, 9}};
  CHECK(corpus_bleu(refs, refs) == 100.0);
  const std::vector<TokenSeq> disjoint{{20, 21, 22, 23, 24}, {25, 26, 27, 28}};
  CHECK(corpus_bleu(disjoint, refs) == 0.0);

  // p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = 0
  CHECK(corpus_bleu(std::vector<TokenSeq>{{1, 2, 3, 4}}, std::vector<TokenSeq>{{1, 2, 3, 5}}) == 0.0);
  // p = 4/5, 3/4, 2/3, 1/2 with equal lengths: 100 * 0.2^(1/4)
  CHECK(corpus_bleu(std::vector<TokenSeq>{{1, 2, 3, 4, 5}}, std::vector<TokenSeq>{{1, 2, 3, 4, 6}}) ==
        doctest::Approx(66.8740304976422).epsilon(1e-12));
  // perfect precision, hypothesis 4 vs reference 6: 100 * exp(-0.5)
  CHECK(corpus_bleu(std::vector<TokenSeq>{{1, 2, 3, 4}}, std::vector<TokenSeq>{{1, 2, 3, 4, 5, 6}}) ==
        doctest::Approx(60.653065971263345).epsilon(1e-12));
  // clipping: the repeated unigram counts at most twice
  CHECK(corpus_bleu(std::vector<TokenSeq>{{7, 7, 7, 7}}, std::vector<TokenSeq>{{7, 7, 1, 2}}) == 0.0);
  CHECK(corpus_bleu(std::vector<TokenSeq>{{}}, std::vector<TokenSeq>{{1, 2, 3, 4}}) == 0.0);
  CHECK_THROWS(corpus_bleu(std::vector<TokenSeq>{}, std::vector<TokenSeq>{}));
  CHECK_THROWS(corpus_bleu(refs, std::vector<TokenSeq>{{1}}));
}

TEST_CASE("bleu is order invariant and 100 only on exact matches") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenSeq> hyps, refs;
    for (int s = 0; s < 6; ++s) {
      TokenSeq r(4 + uniform_index(rng, 5));
      for (auto& t : r) t = static_cast<Token>(10 + uniform_index(rng, 4));
      TokenSeq h = r;
      if (bernoulli(rng, 0.2)) h[uniform_index(rng, h.size())] = 99;
      refs.push_back(r);
      hyps.push_back(h);
    }
    const double b = corpus_bleu(hyps, refs);
    REQUIRE((b == 100.0) == (hyps == refs));
    std::vector<std::size_t> idx(6);
    for (std::size_t i = 0; i < 6; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<TokenSeq> h2, r2;
    for (auto i : idx) {
      h2.push_back(hyps[i]);
      r2.push_back(refs[i]);
    }
    REQUIRE(corpus_bleu(h2, r2) == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("otr examples") {
  const auto langs = make_langs();
  const ConceptSeq c{1, 2, 3, 4};
  auto in = [&](int l) { return render(c, langs[static_cast<std::size_t>(l)]); };
  const Direction d{1, 2};
  const std::vector<int> centric{0};

  std::vector<TokenSeq> all_tgt(5, in(2));
  const auto s0 = compute_otr(all_tgt, d, centric, langs);
  CHECK(s0.otr == 0.0);
  CHECK(s0.otr_c == 0.0);
  CHECK(s0.otr_src == 0.0);

  std::vector<TokenSeq> mix;
  for (int i = 0; i < 6; ++i) mix.push_back(in(2));
  for (int i = 0; i < 3; ++i) mix.push_back(in(0));
  mix.push_back(in(1));
  const auto s1 = compute_otr(mix, d, centric, langs);
  CHECK(s1.otr == doctest::Approx(0.4));
  CHECK(s1.otr_c == doctest::Approx(0.3));
  CHECK(s1.otr_src == doctest::Approx(0.1));

  std::vector<TokenSeq> none(4, TokenSeq{Specials::kEos});
  const auto s2 = compute_otr(none, d, centric, langs);
  CHECK(s2.otr == 1.0);
  CHECK(s2.otr_c == 0.0);
  CHECK(s2.otr_src == 0.0);

  const auto to_centric = compute_otr(mix, Direction{2, 0}, centric, langs);
  CHECK(to_centric.otr_c == 0.0);
  CHECK_THROWS(compute_otr(std::vector<TokenSeq>{}, d, centric, langs));
}

TEST_CASE("otr equals a brute-force recount") {
  const auto langs = make_langs(5);
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 30));
    const int src = static_cast<int>(uniform_index(rng, 5));
    int tgt = static_cast<int>(uniform_index(rng, 4));
    if (tgt >= src) ++tgt;
    std::vector<int> centric{static_cast<int>(uniform_index(rng, 5))};
    if (bernoulli(rng, 0.3)) centric.push_back((centric[0] + 1) % 5);
    std::vector<TokenSeq> outs;
    std::vector<int> truth;
    for (int i = 0; i < n; ++i) {
      const int kind = static_cast<int>(uniform_index(rng, 6));
      if (kind == 5) {
        // tie between two languages
        const ConceptSeq one{3};
        TokenSeq t = render(one, langs[0]);
        const auto other = render(one, langs[1]);
        t.insert(t.end(), other.begin(), other.end());
        outs.push_back(t);
        truth.push_back(-1);
      } else {
        ConceptSeq c(1 + uniform_index(rng, 8));
        for (auto& x : c) x = static_cast<std::int32_t>(uniform_index(rng, 64));
        outs.push_back(render(c, langs[static_cast<std::size_t>(kind)]));
        truth.push_back(kind);
      }
    }
    double off = 0, cen = 0, sr = 0, on = 0, other = 0;
    const bool tgt_centric = std::count(centric.begin(), centric.end(), tgt) > 0;
    for (int l : truth) {
      const bool is_c = l >= 0 && std::count(centric.begin(), centric.end(), l) > 0;
      if (l != tgt) off += 1;
      if (!tgt_centric && is_c) cen += 1;
      if (l == src) sr += 1;
      if (l == tgt) on += 1;
      else if (!is_c && l != src) other += 1;
    }
    const auto s = compute_otr(outs, {src, tgt}, centric, langs);
    REQUIRE(std::abs(s.otr - off / n) <= 1e-12);
    REQUIRE(std::abs(s.otr_c - cen / n) <= 1e-12);
    REQUIRE(std::abs(s.otr_src - sr / n) <= 1e-12);
    REQUIRE(s.otr_c <= s.otr + 1e-12);
    REQUIRE(s.otr_src <= s.otr + 1e-12);
    const bool zero_shot = !tgt_centric && std::count(centric.begin(), centric.end(), src) == 0;
    if (zero_shot) REQUIRE(std::abs(s.otr_c + s.otr_src + on / n + other / n - 1.0) <= 1e-9);
  }
}

TEST_CASE("multiway sets avoid training rows and are reproducible") {
  const auto langs = make_langs();
  SamplingParams sp;
  sp.min_len = 1;
  sp.max_len = 2;
  std::set<ConceptSeq> exclude;
  for (int c = 0; c < 10; ++c) exclude.insert(ConceptSeq{c});
  const auto a = make_multiway_set(64, sp, 50, 3, exclude);
  CHECK(a == make_multiway_set(64, sp, 50, 3, exclude));
  CHECK(a.size() == 50);
  std::set<ConceptSeq> seen;
  for (const auto& row : a.rows) {
    CHECK(exclude.count(row) == 0);
    CHECK(seen.insert(row).second);
    for (const auto& l : langs) CHECK_NOTHROW(render(row, l));
  }
  CHECK(a.head(10).size() == 10);
  CHECK(multiway_from_json(to_json(a)) == a);
  SamplingParams tiny;
  tiny.min_len = 1;
  tiny.max_len = 1;
  CHECK_THROWS(make_multiway_set(3, tiny, 10, 1, {}));
}

TEST_CASE("oracle stub scores perfectly") {
  const auto langs = make_langs();
  const auto set = small_set(langs);
  const OracleTranslator oracle(langs);
  const auto r = evaluate(oracle, set, langs, {0}, TaggingScheme::SrcTgtTags);
  CHECK(r.directions.size() == 4 * 3);
  CHECK(r.sup_bleu == 100.0);
  CHECK(r.zs_bleu == 100.0);
  CHECK(r.zs_otr == 0.0);
  CHECK(r.zs_otr_c == 0.0);
  CHECK(r.zs_otr_src == 0.0);
  int zero_shot = 0;
  for (const auto& d : r.directions) zero_shot += !d.supervised;
  CHECK(zero_shot == 3 * 2);
}

TEST_CASE("centric-only stub is fully off-target on the centric language") {
  const auto langs = make_langs();
  const auto set = small_set(langs);
  const FixedLanguageTranslator stub(langs, 0);
  const auto r = evaluate(stub, set, langs, {0}, TaggingScheme::TEnc);
  CHECK(r.zs_otr == 1.0);
  CHECK(r.zs_otr_c == 1.0);
  CHECK(r.zs_otr_src == 0.0);
  CHECK(r.zs_otr_micro == 1.0);
  CHECK(r.sup_bleu_to_centric == 100.0);
  CHECK(r.at({0, 1}).otr.otr == 1.0);
}

TEST_CASE("multi-centric reports count centric-centric directions as supervised") {
  const auto langs = make_langs(4);
  const auto r = evaluate(OracleTranslator(langs), small_set(langs, 5), langs, {0, 1}, TaggingScheme::SrcTgtTags);
  CHECK(r.at({0, 1}).supervised);
  CHECK_FALSE(r.at({2, 3}).supervised);
}

TEST_CASE("model evaluation is reproducible") {
  const auto langs = make_langs(3, 16);
  ModelConfig c;
  c.vocab_size = vocab_size(langs);
  c.d_model = 16;
  c.num_heads = 2;
  c.ffn_dim = 32;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.max_len = 16;
  const auto p = init_params<float>(c, 4);
  const auto set = small_set(langs, 6);
  const auto a = evaluate(p, c, TaggingScheme::SrcTgtTags, set, langs, {0});
  const auto b = evaluate(p, c, TaggingScheme::SrcTgtTags, set, langs, {0});
  CHECK(to_json(a) == to_json(b));
  for (const auto& d : a.directions) {
    CHECK(d.otr.otr >= 0.0);
    CHECK(d.otr.otr <= 1.0);
    CHECK(d.otr.otr_c <= d.otr.otr);
    CHECK(d.otr.otr_src <= d.otr.otr);
  }
}

TEST_CASE("probe requests follow the tagging conventions") {
  const auto langs = make_langs();
  const ConceptSeq c{1, 2};
  const auto src = render(c, langs[1]);
  const auto none = make_probe_request(c, 1, TagCondition::none(), langs, TaggingScheme::SrcTgtTags);
  CHECK(none.first_token == Specials::kBos);
  CHECK(none.encoder_input.front() == tag_token_for(1));
  const auto tagged = make_probe_request(c, 1, TagCondition::tag(3), langs, TaggingScheme::SrcTgtTags);
  CHECK(tagged.first_token == tag_token_for(3));
  const auto tenc_none = make_probe_request(c, 1, TagCondition::none(), langs, TaggingScheme::TEnc);
  TokenSeq expect = src;
  expect.push_back(Specials::kEos);
  CHECK(tenc_none.encoder_input == expect);
  const auto tenc_src = make_probe_request(c, 1, TagCondition::source_tag(), langs, TaggingScheme::TEnc);
  CHECK(tenc_src.encoder_input.front() == tag_token_for(1));
  CHECK(tenc_src.first_token == Specials::kBos);
}

TEST_CASE("oracle probe is a point mass on the tagged language") {
  const auto langs = make_langs();
  const auto set = small_set(langs, 12);
  const OracleTranslator oracle(langs);
  const auto conditions = default_conditions(2, 4);
  CHECK(conditions.size() == 5);
  const auto report = tag_probe(oracle, set.rows, 2, conditions, langs, TaggingScheme::SrcTgtTags);
  for (const auto& row : report.rows) {
    double sum = 0;
    for (double f : row.distribution) sum += f;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    const int expect = row.condition.kind == TagCondition::Kind::Tag ? row.condition.lang : 2;
    CHECK(row.distribution[static_cast<std::size_t>(expect)] == 1.0);
  }
  CHECK(report.source_share(TagCondition::source_tag()) == 1.0);
  CHECK(report.source_share(TagCondition::tag(0)) == 0.0);
}

TEST_CASE("reports serialise to JSON and CSV") {
  const auto langs = make_langs();
  const auto set = small_set(langs, 8);
  const auto r = evaluate(FixedLanguageTranslator(langs, 1), set, langs, {0}, TaggingScheme::SrcTgtTags);
  const auto j = to_json(r);
  CHECK(to_json(eval_report_from_json(j)) == j);
  std::ostringstream csv;
  write_eval_csv(csv, r);
  const auto rows = parse_csv(csv.str());
  REQUIRE(rows.size() == 1 + r.directions.size());
  CHECK(rows[0][0] == "src");
  CHECK(rows[0].back() == "none");
  CHECK(rows[1].size() == rows[0].size());
  CHECK(csv.str().find("\r\n") != std::string::npos);

  const auto probe = tag_probe(OracleTranslator(langs), set.rows, 0, default_conditions(0, 4), langs,
                               TaggingScheme::SrcTgtTags);
  CHECK(to_json(probe_report_from_json(to_json(probe))) == to_json(probe));
  std::ostringstream pcsv;
  write_probe_csv(pcsv, {probe});
  const auto prow = parse_csv(pcsv.str());
  CHECK(prow.size() == 1 + probe.rows.size());
  CHECK(prow[1][1] == "none");
  CHECK(prow[2][1] == "source_tag");
}

TEST_CASE("csv escaping round-trips") {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"a", "b,c", "say \"hi\"", ""});
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "say \"hi\"", ""});
  CHECK(CsvWriter::number(0.1) == "0.1");
  CHECK(std::stod(CsvWriter::number(1.0 / 3.0)) == 1.0 / 3.0);
}
