#include "offtarget/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kernels.hpp"

namespace offtarget {

using namespace kernels;

namespace {

// Attention of one query row per sequence against rows [0, visible_b) of a
// per-sequence key block with the given stride.
template <typename T>
void single_query_attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v, int stride,
                            const std::vector<int>& visible, int heads, int head_dim,
                            Matrix<T>& context) {
  const int batch = static_cast<int>(q.rows());
  const int d = heads * head_dim;
  context.setZero(batch, d);
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  AlignedVector<T> p(static_cast<std::size_t>(stride));
  for (int b = 0; b < batch; ++b) {
    const int limit = visible[static_cast<std::size_t>(b)];
    for (int h = 0; h < heads; ++h) {
      const T* qi = q.data() + static_cast<std::size_t>(b) * d + h * head_dim;
      T mx = -std::numeric_limits<T>::infinity();
      for (int j = 0; j < limit; ++j) {
        const T* kj = k.data() + (static_cast<std::size_t>(b) * stride + j) * d + h * head_dim;
        T acc = 0;
        for (int e = 0; e < head_dim; ++e) acc += qi[e] * kj[e];
        p[static_cast<std::size_t>(j)] = acc * scale;
        mx = std::max(mx, p[static_cast<std::size_t>(j)]);
      }
      T sum = 0;
      for (int j = 0; j < limit; ++j) {
        p[static_cast<std::size_t>(j)] = std::exp(p[static_cast<std::size_t>(j)] - mx);
        sum += p[static_cast<std::size_t>(j)];
      }
      const T inv = T(1) / sum;
      T* ci = context.data() + static_cast<std::size_t>(b) * d + h * head_dim;
      for (int j = 0; j < limit; ++j) {
        const T w = p[static_cast<std::size_t>(j)] * inv;
        const T* vj = v.data() + (static_cast<std::size_t>(b) * stride + j) * d + h * head_dim;
        for (int e = 0; e < head_dim; ++e) ci[e] += w * vj[e];
      }
    }
  }
}

}  // namespace

template <typename T>
std::vector<TokenSeq> greedy_decode(const Parameters<T>& params, const ModelConfig& config,
                                    std::span<const TokenSeq> encoder_inputs,
                                    std::span<const Token> first_tokens, int max_out_len) {
  if (encoder_inputs.size() != first_tokens.size())
    throw std::invalid_argument("one start token per input is required");
  if (encoder_inputs.empty()) return {};
  const Transformer<T> net(config, params);
  const auto& L = params.layout;
  const int d = config.d_model;
  const int heads = config.num_heads;
  const int hd = config.head_dim();
  const int steps = std::clamp(max_out_len, 0, config.max_len);
  const int batch = static_cast<int>(encoder_inputs.size());

  std::vector<TaggedExample> examples;
  examples.reserve(encoder_inputs.size());
  for (std::size_t i = 0; i < encoder_inputs.size(); ++i)
    examples.push_back({encoder_inputs[i], {first_tokens[i]}, {Specials::kEos}});
  const Batch enc_batch = make_batch(examples);
  const Matrix<T> memory = net.encode(enc_batch);

  std::vector<Matrix<T>> cross_k(static_cast<std::size_t>(config.dec_layers));
  std::vector<Matrix<T>> cross_v(static_cast<std::size_t>(config.dec_layers));
  std::vector<Matrix<T>> self_k(static_cast<std::size_t>(config.dec_layers));
  std::vector<Matrix<T>> self_v(static_cast<std::size_t>(config.dec_layers));
  const int cache_len = std::max(steps, 1);
  for (int l = 0; l < config.dec_layers; ++l) {
    const auto& s = L.decoder[static_cast<std::size_t>(l)].cross_attn;
    linear(memory, params, s.wk, s.bk, cross_k[static_cast<std::size_t>(l)]);
    linear(memory, params, s.wv, s.bv, cross_v[static_cast<std::size_t>(l)]);
    self_k[static_cast<std::size_t>(l)].setZero(static_cast<Eigen::Index>(batch) * cache_len, d);
    self_v[static_cast<std::size_t>(l)].setZero(static_cast<Eigen::Index>(batch) * cache_len, d);
  }

  const auto table = mat(params, L.embedding);
  const Matrix<T> positions = sinusoidal_positions(config.max_len, d).cast<T>();
  const T scale = std::sqrt(static_cast<T>(d));

  std::vector<TokenSeq> outputs(static_cast<std::size_t>(batch));
  std::vector<bool> done(static_cast<std::size_t>(batch), false);
  std::vector<Token> current(first_tokens.begin(), first_tokens.end());
  std::vector<int> self_visible(static_cast<std::size_t>(batch));
  Matrix<T> x(batch, d), a, q, kv, ctx, sub, hidden;
  int remaining = batch;

  for (int t = 0; t < steps && remaining > 0; ++t) {
    for (int b = 0; b < batch; ++b) {
      x.row(b) = table.row(current[static_cast<std::size_t>(b)]) * scale + positions.row(t);
    }
    std::fill(self_visible.begin(), self_visible.end(), t + 1);
    for (int l = 0; l < config.dec_layers; ++l) {
      const auto& s = L.decoder[static_cast<std::size_t>(l)];
      auto& sk = self_k[static_cast<std::size_t>(l)];
      auto& sv = self_v[static_cast<std::size_t>(l)];

      layer_norm(x, vec(params, s.ln_self.gain), vec(params, s.ln_self.bias), a, nullptr);
      linear(a, params, s.self_attn.wq, s.self_attn.bq, q);
      linear(a, params, s.self_attn.wk, s.self_attn.bk, kv);
      for (int b = 0; b < batch; ++b) sk.row(b * cache_len + t) = kv.row(b);
      linear(a, params, s.self_attn.wv, s.self_attn.bv, kv);
      for (int b = 0; b < batch; ++b) sv.row(b * cache_len + t) = kv.row(b);
      single_query_attention(q, sk, sv, cache_len, self_visible, heads, hd, ctx);
      linear(ctx, params, s.self_attn.wo, s.self_attn.bo, sub);
      x += sub;

      layer_norm(x, vec(params, s.ln_cross.gain), vec(params, s.ln_cross.bias), a, nullptr);
      linear(a, params, s.cross_attn.wq, s.cross_attn.bq, q);
      single_query_attention(q, cross_k[static_cast<std::size_t>(l)], cross_v[static_cast<std::size_t>(l)],
                             enc_batch.enc_len, enc_batch.enc_lengths, heads, hd, ctx);
      linear(ctx, params, s.cross_attn.wo, s.cross_attn.bo, sub);
      x += sub;

      layer_norm(x, vec(params, s.ln_ffn.gain), vec(params, s.ln_ffn.bias), a, nullptr);
      linear(a, params, s.ffn.w1, s.ffn.b1, hidden);
      hidden = hidden.cwiseMax(T(0));
      linear(hidden, params, s.ffn.w2, s.ffn.b2, sub);
      x += sub;
    }
    layer_norm(x, vec(params, L.decoder_final.gain), vec(params, L.decoder_final.bias), a, nullptr);
    const Matrix<T> logits = a * table.transpose();
    for (int b = 0; b < batch; ++b) {
      if (done[static_cast<std::size_t>(b)]) continue;
      Eigen::Index best = 0;
      T best_v = logits(b, 0);
      for (Eigen::Index v = 1; v < logits.cols(); ++v) {
        if (logits(b, v) > best_v) {
          best_v = logits(b, v);
          best = v;
        }
      }
      const auto tok = static_cast<Token>(best);
      if (tok == Specials::kEos) {
        done[static_cast<std::size_t>(b)] = true;
        --remaining;
      } else {
        outputs[static_cast<std::size_t>(b)].push_back(tok);
      }
      current[static_cast<std::size_t>(b)] = tok;
    }
  }
  return outputs;
}

template <typename T>
TokenSeq greedy_decode(const Parameters<T>& params, const ModelConfig& config,
                       const TokenSeq& encoder_input, Token first_token, int max_out_len) {
  const TokenSeq inputs[] = {encoder_input};
  const Token firsts[] = {first_token};
  return greedy_decode(params, config, std::span<const TokenSeq>(inputs), std::span<const Token>(firsts),
                       max_out_len).front();
}

template std::vector<TokenSeq> greedy_decode<float>(const Parameters<float>&, const ModelConfig&,
                                                    std::span<const TokenSeq>, std::span<const Token>, int);
template std::vector<TokenSeq> greedy_decode<double>(const Parameters<double>&, const ModelConfig&,
                                                     std::span<const TokenSeq>, std::span<const Token>, int);
template TokenSeq greedy_decode<float>(const Parameters<float>&, const ModelConfig&, const TokenSeq&, Token, int);
template TokenSeq greedy_decode<double>(const Parameters<double>&, const ModelConfig&, const TokenSeq&, Token, int);

}  // namespace offtarget
