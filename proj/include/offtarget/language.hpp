#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace offtarget {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;
using ConceptSeq = std::vector<std::int32_t>;

/// Reserved ids. Language tags follow at kFirstTagToken, one per language,
/// and surface ranges start right after the last tag.
struct Specials {
  static constexpr Token kPad = 0;
  static constexpr Token kBos = 1;
  static constexpr Token kEos = 2;
  static constexpr Token kMask = 3;
  static constexpr Token kFirstTagToken = 4;
};

/// Positional word-order rule applied when rendering concepts.
struct OrderRule {
  enum class Kind { Identity, ReverseWindow };

  Kind kind = Kind::Identity;
  int window = 1;

  static OrderRule identity() { return {Kind::Identity, 1}; }
  static OrderRule reverse_window(int k);

  /// Source position of output position i in a sequence of length n.
  /// The mapping is an involution, so it serves render and parse alike.
  std::size_t source_position(std::size_t i, std::size_t n) const;

  std::string to_string() const;
  static OrderRule from_string(const std::string& text);

  friend bool operator==(const OrderRule&, const OrderRule&) = default;
};

struct LanguageSpec {
  int lang_id = 0;
  Token tag_token = 0;
  Token surface_base = 0;
  std::vector<std::int32_t> concept_perm;
  OrderRule order_rule;

  int concept_vocab_size() const { return static_cast<int>(concept_perm.size()); }
  bool owns(Token t) const {
    return t >= surface_base && t < surface_base + concept_vocab_size();
  }

  friend bool operator==(const LanguageSpec&, const LanguageSpec&) = default;
};

using Languages = std::vector<LanguageSpec>;

enum class PermutationMode { Random, Identity };

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, Token token, const std::string& what)
      : std::runtime_error(what), position_(position), token_(token) {}
  std::size_t position() const { return position_; }
  Token token() const { return token_; }

 private:
  std::size_t position_;
  Token token_;
};

Token tag_token_for(int lang_id);
Token first_surface_token(int num_langs);

/// Total vocabulary: specials, one tag per language, then every surface range.
int vocab_size(const Languages& langs);

Languages build_languages(int num_langs, int concept_vocab_size,
                          std::span<const OrderRule> order_rules, std::uint64_t seed,
                          PermutationMode mode = PermutationMode::Random);

/// Throws std::invalid_argument naming the first broken invariant
/// (disjoint ranges, bijective permutations, distinct reserved tags).
void validate_languages(const Languages& langs);

TokenSeq render(std::span<const std::int32_t> concepts, const LanguageSpec& lang);
ConceptSeq parse(std::span<const Token> tokens, const LanguageSpec& lang);

bool is_special(Token t, int num_langs);

/// Strict-majority vote over non-special tokens; nullopt on a tie or when
/// no surface token is present.
std::optional<int> detect_language(std::span<const Token> tokens, const Languages& langs);

}  // namespace offtarget
