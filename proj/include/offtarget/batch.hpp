#pragma once

#include <span>
#include <vector>

#include "offtarget/corpus.hpp"

namespace offtarget {

/// Padded, tagged token matrices (row-major, size x len) with per-row lengths.
/// decoder_input and decoder_target share dec_len and dec_lengths.
struct Batch {
  int size = 0;
  int enc_len = 0;
  int dec_len = 0;
  std::vector<Token> encoder_input;
  std::vector<Token> decoder_input;
  std::vector<Token> decoder_target;
  std::vector<int> enc_lengths;
  std::vector<int> dec_lengths;
  std::vector<Direction> directions;

  Token enc(int b, int t) const { return encoder_input[static_cast<std::size_t>(b * enc_len + t)]; }
  Token dec_in(int b, int t) const { return decoder_input[static_cast<std::size_t>(b * dec_len + t)]; }
  Token dec_tgt(int b, int t) const { return decoder_target[static_cast<std::size_t>(b * dec_len + t)]; }
  std::size_t target_tokens() const;
};

Batch make_batch(std::span<const TaggedExample> examples, std::span<const Direction> directions = {});

}  // namespace offtarget
