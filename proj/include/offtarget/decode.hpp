#pragma once

#include <span>
#include <vector>

#include "offtarget/parameters.hpp"
#include "offtarget/transformer.hpp"

namespace offtarget {

/// Batched argmax decoding with cached self-attention keys/values. Each
/// output excludes the start token and the terminating EOS. Ties go to the
/// lowest token id. max_out_len is clamped to the model's max_len.
template <typename T>
std::vector<TokenSeq> greedy_decode(const Parameters<T>& params, const ModelConfig& config,
                                    std::span<const TokenSeq> encoder_inputs,
                                    std::span<const Token> first_tokens, int max_out_len);

template <typename T>
TokenSeq greedy_decode(const Parameters<T>& params, const ModelConfig& config,
                       const TokenSeq& encoder_input, Token first_token, int max_out_len);

}  // namespace offtarget
