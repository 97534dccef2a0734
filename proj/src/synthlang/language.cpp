#include "offtarget/language.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "offtarget/rng.hpp"

namespace offtarget {

OrderRule OrderRule::reverse_window(int k) {
  if (k < 1) throw std::invalid_argument("reverse window must be >= 1");
  return {Kind::ReverseWindow, k};
}

std::size_t OrderRule::source_position(std::size_t i, std::size_t n) const {
  if (kind == Kind::Identity || window <= 1) return i;
  const std::size_t k = static_cast<std::size_t>(window);
  const std::size_t start = (i / k) * k;
  const std::size_t end = std::min(start + k, n);
  return start + (end - 1 - i);
}

std::string OrderRule::to_string() const {
  if (kind == Kind::Identity) return "identity";
  return "reverse_window(" + std::to_string(window) + ")";
}

OrderRule OrderRule::from_string(const std::string& text) {
  if (text == "identity") return identity();
  const std::string prefix = "reverse_window(";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size() + 1 && text.back() == ')') {
    const std::string digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == digits.size() && used > 0) return reverse_window(k);
  }
  throw std::invalid_argument("unknown order rule '" + text + "'");
}

Token tag_token_for(int lang_id) { return Specials::kFirstTagToken + lang_id; }

Token first_surface_token(int num_langs) { return Specials::kFirstTagToken + num_langs; }

int vocab_size(const Languages& langs) {
  int v = first_surface_token(static_cast<int>(langs.size()));
  for (const auto& l : langs) v = std::max(v, l.surface_base + l.concept_vocab_size());
  return v;
}

Languages build_languages(int num_langs, int concept_vocab_size,
                          std::span<const OrderRule> order_rules, std::uint64_t seed,
                          PermutationMode mode) {
  if (num_langs < 2) throw std::invalid_argument("need at least two languages");
  if (concept_vocab_size < 2) throw std::invalid_argument("concept vocabulary must be >= 2");
  if (order_rules.size() != static_cast<std::size_t>(num_langs))
    throw std::invalid_argument("order_rules must have one entry per language");

  Languages langs;
  langs.reserve(static_cast<std::size_t>(num_langs));
  const Token base = first_surface_token(num_langs);
  for (int l = 0; l < num_langs; ++l) {
    LanguageSpec spec;
    spec.lang_id = l;
    spec.tag_token = tag_token_for(l);
    spec.surface_base = base + l * concept_vocab_size;
    spec.order_rule = order_rules[static_cast<std::size_t>(l)];
    spec.concept_perm.resize(static_cast<std::size_t>(concept_vocab_size));
    std::iota(spec.concept_perm.begin(), spec.concept_perm.end(), 0);
    if (mode == PermutationMode::Random) {
      Rng rng(derive_seed(seed, {0x1a46, static_cast<std::uint64_t>(l)}));
      for (std::size_t i = spec.concept_perm.size() - 1; i > 0; --i) {
        std::swap(spec.concept_perm[i], spec.concept_perm[uniform_index(rng, i + 1)]);
      }
    }
    langs.push_back(std::move(spec));
  }
  return langs;
}

void validate_languages(const Languages& langs) {
  if (langs.size() < 2) throw std::invalid_argument("need at least two languages");
  const int n = static_cast<int>(langs.size());
  for (int i = 0; i < n; ++i) {
    const auto& l = langs[static_cast<std::size_t>(i)];
    if (l.lang_id != i) throw std::invalid_argument("lang_id must equal registry position");
    if (l.tag_token != tag_token_for(i))
      throw std::invalid_argument("tag token of language " + std::to_string(i) +
                                  " is outside the reserved range");
    if (l.surface_base < first_surface_token(n))
      throw std::invalid_argument("surface range of language " + std::to_string(i) +
                                  " overlaps reserved ids");
    std::vector<std::int32_t> sorted = l.concept_perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t c = 0; c < sorted.size(); ++c) {
      if (sorted[c] != static_cast<std::int32_t>(c))
        throw std::invalid_argument("concept permutation of language " + std::to_string(i) +
                                    " is not a bijection");
    }
    if (l.order_rule.window < 1) throw std::invalid_argument("order window must be >= 1");
    for (int j = 0; j < i; ++j) {
      const auto& o = langs[static_cast<std::size_t>(j)];
      const bool disjoint = l.surface_base + l.concept_vocab_size() <= o.surface_base ||
                            o.surface_base + o.concept_vocab_size() <= l.surface_base;
      if (!disjoint)
        throw std::invalid_argument("surface ranges of languages " + std::to_string(j) + " and " +
                                    std::to_string(i) + " overlap");
    }
  }
}

TokenSeq render(std::span<const std::int32_t> concepts, const LanguageSpec& lang) {
  const std::size_t n = concepts.size();
  TokenSeq out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t c = concepts[lang.order_rule.source_position(i, n)];
    if (c < 0 || c >= lang.concept_vocab_size())
      throw std::out_of_range("concept " + std::to_string(c) + " outside vocabulary");
    out[i] = lang.surface_base + lang.concept_perm[static_cast<std::size_t>(c)];
  }
  return out;
}

ConceptSeq parse(std::span<const Token> tokens, const LanguageSpec& lang) {
  const std::size_t n = tokens.size();
  // inverse permutation, surface offset -> concept
  std::vector<std::int32_t> inverse(lang.concept_perm.size());
  for (std::size_t c = 0; c < lang.concept_perm.size(); ++c)
    inverse[static_cast<std::size_t>(lang.concept_perm[c])] = static_cast<std::int32_t>(c);

  ConceptSeq out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = lang.order_rule.source_position(i, n);
    const Token t = tokens[src];
    if (!lang.owns(t)) {
      std::ostringstream msg;
      msg << "token " << t << " at position " << src << " is outside the surface range ["
          << lang.surface_base << ", " << lang.surface_base + lang.concept_vocab_size()
          << ") of language " << lang.lang_id;
      throw ParseError(src, t, msg.str());
    }
    out[i] = inverse[static_cast<std::size_t>(t - lang.surface_base)];
  }
  return out;
}

bool is_special(Token t, int num_langs) { return t >= 0 && t < first_surface_token(num_langs); }

std::optional<int> detect_language(std::span<const Token> tokens, const Languages& langs) {
  std::vector<std::size_t> votes(langs.size(), 0);
  std::size_t counted = 0;
  const int n = static_cast<int>(langs.size());
  for (Token t : tokens) {
    if (is_special(t, n)) continue;
    ++counted;
    for (std::size_t l = 0; l < langs.size(); ++l) {
      if (langs[l].owns(t)) {
        ++votes[l];
        break;
      }
    }
  }
  if (counted == 0) return std::nullopt;
  for (std::size_t l = 0; l < votes.size(); ++l) {
    if (2 * votes[l] > counted) return static_cast<int>(l);
  }
  return std::nullopt;
}

}  // namespace offtarget
