#include <algorithm>
#include <set>

#include "doctest.h"
#include "offtarget/language.hpp"
#include "offtarget/rng.hpp"

using namespace offtarget;

namespace {

std::vector<OrderRule> alternating_rules(int n) {
  std::vector<OrderRule> rules;
  for (int i = 0; i < n; ++i) rules.push_back(i % 2 ? OrderRule::reverse_window(3) : OrderRule::identity());
  return rules;
}

LanguageSpec identity_lang(Token base, OrderRule rule, int vc = 200) {
  LanguageSpec l;
  l.lang_id = 0;
  l.tag_token = tag_token_for(0);
  l.surface_base = base;
  l.concept_perm.resize(static_cast<std::size_t>(vc));
  for (int i = 0; i < vc; ++i) l.concept_perm[static_cast<std::size_t>(i)] = i;
  l.order_rule = rule;
  return l;
}

}  // namespace

TEST_CASE("build_languages lays out disjoint consecutive ranges") {
  const std::vector<OrderRule> rules(2, OrderRule::identity());
  const auto langs = build_languages(2, 3, rules, 7, PermutationMode::Identity);
  const Token base = first_surface_token(2);
  CHECK(langs[0].surface_base == base);
  CHECK(langs[1].surface_base == base + 3);
  CHECK(langs[0].concept_perm == std::vector<std::int32_t>{0, 1, 2});
  CHECK(langs[0].tag_token == 4);
  CHECK(langs[1].tag_token == 5);
  CHECK(vocab_size(langs) == base + 6);
}

TEST_CASE("build_languages is deterministic per seed") {
  const auto rules = alternating_rules(4);
  CHECK(build_languages(4, 50, rules, 7) == build_languages(4, 50, rules, 7));
  CHECK(build_languages(4, 50, rules, 7) != build_languages(4, 50, rules, 8));
}

TEST_CASE("six random languages pass the invariant checker") {
  const auto langs = build_languages(6, 200, alternating_rules(6), 1);
  CHECK_NOTHROW(validate_languages(langs));
  for (const auto& l : langs) {
    auto sorted = l.concept_perm;
    std::sort(sorted.begin(), sorted.end());
    for (int c = 0; c < 200; ++c) CHECK(sorted[static_cast<std::size_t>(c)] == c);
    CHECK(l.concept_perm != sorted);
  }
}

TEST_CASE("build_languages rejects degenerate requests") {
  const auto rules1 = alternating_rules(1);
  const auto rules2 = alternating_rules(2);
  CHECK_THROWS_AS(build_languages(1, 10, rules1, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_languages(2, 1, rules2, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_languages(2, 10, rules1, 0), std::invalid_argument);
}

TEST_CASE("validate_languages catches overlap and broken permutations") {
  auto langs = build_languages(3, 10, alternating_rules(3), 3);
  auto overlap = langs;
  overlap[2].surface_base = overlap[1].surface_base + 5;
  CHECK_THROWS_AS(validate_languages(overlap), std::invalid_argument);
  auto broken = langs;
  broken[0].concept_perm[0] = broken[0].concept_perm[1];
  CHECK_THROWS_AS(validate_languages(broken), std::invalid_argument);
  auto bad_tag = langs;
  bad_tag[1].tag_token = 2;
  CHECK_THROWS_AS(validate_languages(bad_tag), std::invalid_argument);
}

TEST_CASE("render applies permutation and word order") {
  const std::vector<std::int32_t> c3{0, 1, 2};
  CHECK(render(c3, identity_lang(100, OrderRule::identity())) == TokenSeq{100, 101, 102});
  CHECK(render(c3, identity_lang(100, OrderRule::reverse_window(3))) == TokenSeq{102, 101, 100});
  const std::vector<std::int32_t> c4{0, 1, 2, 3};
  CHECK(render(c4, identity_lang(100, OrderRule::reverse_window(3))) == TokenSeq{102, 101, 100, 103});
  const std::vector<std::int32_t> c5{0, 1, 2, 3, 4};
  CHECK(render(c5, identity_lang(100, OrderRule::reverse_window(3))) == TokenSeq{102, 101, 100, 104, 103});
  const std::vector<std::int32_t> bad{200};
  CHECK_THROWS_AS(render(bad, identity_lang(100, OrderRule::identity())), std::out_of_range);
}

TEST_CASE("parse inverts render over random languages and sentences") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto langs = build_languages(2, 64, alternating_rules(2), rng());
    const auto& l = langs[uniform_index(rng, 2)];
    std::vector<std::int32_t> c(1 + uniform_index(rng, 15));
    for (auto& x : c) x = static_cast<std::int32_t>(uniform_index(rng, 64));
    REQUIRE(parse(render(c, l), l) == c);
  }
  const auto langs = build_languages(2, 64, alternating_rules(2), 5);
  const std::vector<std::int32_t> fixed{5, 9, 2};
  CHECK(parse(render(fixed, langs[1]), langs[1]) == ConceptSeq{5, 9, 2});
}

TEST_CASE("parse reports the offending position") {
  const auto l = identity_lang(100, OrderRule::identity(), 200);
  const TokenSeq one{100};
  CHECK(parse(one, l) == ConceptSeq{0});
  const TokenSeq bad{999};
  try {
    parse(bad, l);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 0);
    CHECK(e.token() == 999);
  }
  const TokenSeq later{100, 101, 50};
  try {
    parse(later, l);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 2);
  }
}

TEST_CASE("detect_language uses a strict majority") {
  const std::vector<OrderRule> rules(2, OrderRule::identity());
  Languages langs = build_languages(2, 200, rules, 0, PermutationMode::Identity);
  langs[0].surface_base = 100;
  langs[1].surface_base = 300;
  CHECK(detect_language(TokenSeq{100, 101}, langs) == 0);
  CHECK(detect_language(TokenSeq{100, 101, 305}, langs) == 0);
  CHECK(detect_language(TokenSeq{Specials::kEos}, langs) == std::nullopt);
  CHECK(detect_language(TokenSeq{}, langs) == std::nullopt);
  CHECK(detect_language(TokenSeq{100, 305}, langs) == std::nullopt);
  CHECK(detect_language(TokenSeq{Specials::kMask, 305, tag_token_for(0)}, langs) == 1);
}

TEST_CASE("detect_language is exact on rendered sentences") {
  const auto langs = build_languages(6, 100, alternating_rules(6), 9);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::int32_t> c(1 + uniform_index(rng, 12));
    for (auto& x : c) x = static_cast<std::int32_t>(uniform_index(rng, 100));
    for (const auto& l : langs) REQUIRE(detect_language(render(c, l), langs) == l.lang_id);
  }
}

TEST_CASE("order rules round-trip through text") {
  CHECK(OrderRule::from_string("identity") == OrderRule::identity());
  CHECK(OrderRule::from_string(OrderRule::reverse_window(4).to_string()) == OrderRule::reverse_window(4));
  CHECK_THROWS(OrderRule::from_string("reverse_window(x)"));
  CHECK_THROWS(OrderRule::from_string("shuffle"));
}
