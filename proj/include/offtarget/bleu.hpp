#pragma once

#include <span>

#include "offtarget/language.hpp"

namespace offtarget {

/// Corpus BLEU on token ids, n = 1..4, uniform weights, brevity penalty and
/// no smoothing: any zero n-gram precision gives 0. Returns a value in [0, 100].
double corpus_bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references);

}  // namespace offtarget
