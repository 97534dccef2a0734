#include "offtarget/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernels.hpp"

namespace offtarget {

using namespace kernels;

Matrix<double> sinusoidal_positions(int max_len, int d_model) {
  Matrix<double> pe(max_len, d_model);
  for (int pos = 0; pos < max_len; ++pos) {
    for (int i = 0; i < d_model / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * i / d_model);
      pe(pos, 2 * i) = std::sin(pos * freq);
      pe(pos, 2 * i + 1) = std::cos(pos * freq);
    }
  }
  return pe;
}

namespace {

template <typename T>
void embed(const Parameters<T>& p, const Matrix<T>& positions, const std::vector<Token>& tokens,
           const std::vector<int>& lengths, int batch, int len, int d, Matrix<T>& x) {
  const auto table = mat(p, p.layout.embedding);
  const T scale = std::sqrt(static_cast<T>(d));
  x.resize(static_cast<Eigen::Index>(batch) * len, d);
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < len; ++t) {
      // positions past the sequence end are read as PAD whatever they hold
      const Token tok = t < lengths[static_cast<std::size_t>(b)]
                            ? tokens[static_cast<std::size_t>(b * len + t)]
                            : Specials::kPad;
      x.row(b * len + t) = table.row(tok) * scale + positions.row(t);
    }
  }
}

template <typename T>
void embed_backward(Parameters<T>& g, const Matrix<T>& dx, const std::vector<Token>& tokens,
                    const std::vector<int>& lengths, int batch, int len, int d) {
  auto table = mat(g, g.layout.embedding);
  const T scale = std::sqrt(static_cast<T>(d));
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < lengths[static_cast<std::size_t>(b)]; ++t) {
      table.row(tokens[static_cast<std::size_t>(b * len + t)]) += dx.row(b * len + t) * scale;
    }
  }
}

template <typename T>
void attention_forward(const Parameters<T>& p, const AttentionSlots& s, const Matrix<T>& xq,
                       const Matrix<T>& xkv, const AttentionShape& shape, AttentionCache<T>& c,
                       Matrix<T>& out) {
  linear(xq, p, s.wq, s.bq, c.query);
  linear(xkv, p, s.wk, s.bk, c.key);
  linear(xkv, p, s.wv, s.bv, c.value);
  attention_core(c.query, c.key, c.value, shape, c.probs, c.context);
  c.q_len = shape.q_len;
  c.k_len = shape.k_len;
  linear(c.context, p, s.wo, s.bo, out);
}

// dxq and dxkv may alias (self-attention); both accumulate.
template <typename T>
void attention_backward(const Parameters<T>& p, const AttentionSlots& s, const Matrix<T>& dout,
                        const Matrix<T>& xq, const Matrix<T>& xkv, const AttentionShape& shape,
                        const AttentionCache<T>& c, Parameters<T>& g, Matrix<T>& dxq,
                        Matrix<T>& dxkv) {
  Matrix<T> dcontext = Matrix<T>::Zero(c.context.rows(), c.context.cols());
  linear_backward(c.context, dout, p, s.wo, g, s.wo, s.bo, &dcontext);
  Matrix<T> dq, dk, dv;
  attention_core_backward(dcontext, c.query, c.key, c.value, c.probs, shape, dq, dk, dv);
  linear_backward(xq, dq, p, s.wq, g, s.wq, s.bq, &dxq);
  linear_backward(xkv, dk, p, s.wk, g, s.wk, s.bk, &dxkv);
  linear_backward(xkv, dv, p, s.wv, g, s.wv, s.bv, &dxkv);
}

template <typename T>
void ffn_forward(const Parameters<T>& p, const FeedForwardSlots& s, const Matrix<T>& x,
                 FeedForwardCache<T>& c, Matrix<T>& out) {
  linear(x, p, s.w1, s.b1, c.pre_activation);
  c.hidden = c.pre_activation.cwiseMax(T(0));
  linear(c.hidden, p, s.w2, s.b2, out);
}

template <typename T>
void ffn_backward(const Parameters<T>& p, const FeedForwardSlots& s, const Matrix<T>& dout,
                  const Matrix<T>& x, const FeedForwardCache<T>& c, Parameters<T>& g, Matrix<T>& dx) {
  Matrix<T> dhidden = Matrix<T>::Zero(c.hidden.rows(), c.hidden.cols());
  linear_backward(c.hidden, dout, p, s.w2, g, s.w2, s.b2, &dhidden);
  dhidden = (c.pre_activation.array() > T(0)).select(dhidden, T(0));
  linear_backward(x, dhidden, p, s.w1, g, s.w1, s.b1, &dx);
}

template <typename T>
void maybe_dropout(Matrix<T>& x, bool train, double prob, Rng* rng, Matrix<T>& mask) {
  if (train && prob > 0.0) {
    if (!rng) throw std::invalid_argument("train-mode forward needs a dropout stream");
    dropout(x, prob, *rng, mask);
  } else {
    mask.resize(0, 0);
  }
}

template <typename T>
Matrix<T> masked(const Matrix<T>& grad, const Matrix<T>& mask) {
  if (mask.size() == 0) return grad;
  return grad.cwiseProduct(mask);
}

}  // namespace

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, const Parameters<T>& params)
    : config_(config), params_(params) {
  config.validate();
  const ParamLayout expected = ParamLayout::build(config);
  if (expected.tensors != params.layout.tensors || params.values.size() != expected.total)
    throw std::invalid_argument("parameters do not match the model configuration");
  positions_ = sinusoidal_positions(config.max_len, config.d_model).cast<T>();
}

template <typename T>
void Transformer<T>::check_batch(const Batch& batch) const {
  if (batch.size < 1) throw std::invalid_argument("empty batch");
  if (batch.enc_len < 1 || batch.dec_len < 1) throw std::invalid_argument("empty sequences");
  if (batch.enc_len > config_.max_len || batch.dec_len > config_.max_len)
    throw std::invalid_argument("sequence longer than max_len (" + std::to_string(config_.max_len) + ")");
  const auto n = static_cast<std::size_t>(batch.size);
  if (batch.encoder_input.size() != n * static_cast<std::size_t>(batch.enc_len) ||
      batch.decoder_input.size() != n * static_cast<std::size_t>(batch.dec_len) ||
      batch.decoder_target.size() != n * static_cast<std::size_t>(batch.dec_len) ||
      batch.enc_lengths.size() != n || batch.dec_lengths.size() != n)
    throw std::invalid_argument("batch tensors are not shape-aligned");
  for (std::size_t b = 0; b < n; ++b) {
    if (batch.enc_lengths[b] < 1 || batch.enc_lengths[b] > batch.enc_len || batch.dec_lengths[b] < 1 ||
        batch.dec_lengths[b] > batch.dec_len)
      throw std::invalid_argument("sequence length outside the padded extent");
  }
  auto in_vocab = [&](Token t) { return t >= 0 && t < config_.vocab_size; };
  for (Token t : batch.encoder_input)
    if (!in_vocab(t)) throw std::invalid_argument("encoder token outside vocabulary");
  for (Token t : batch.decoder_input)
    if (!in_vocab(t)) throw std::invalid_argument("decoder token outside vocabulary");
  for (Token t : batch.decoder_target)
    if (!in_vocab(t)) throw std::invalid_argument("target token outside vocabulary");
}

template <typename T>
std::vector<int> Transformer<T>::target_rows(const Batch& batch) {
  std::vector<int> rows;
  for (int b = 0; b < batch.size; ++b) {
    for (int t = 0; t < batch.dec_lengths[static_cast<std::size_t>(b)]; ++t) {
      if (batch.dec_tgt(b, t) != Specials::kPad) rows.push_back(b * batch.dec_len + t);
    }
  }
  return rows;
}

template <typename T>
void Transformer<T>::run_encoder(const Batch& batch, bool train, Rng* rng, ForwardPass<T>& pass) const {
  const auto& p = params_;
  const auto& L = p.layout;
  const int d = config_.d_model;
  const double drop = config_.dropout_prob;
  const AttentionShape enc_shape{batch.size, batch.enc_len, batch.enc_len, config_.num_heads,
                                 config_.head_dim(), false, &batch.enc_lengths};

  Matrix<T> x;
  embed(p, positions_, batch.encoder_input, batch.enc_lengths, batch.size, batch.enc_len, d, x);
  maybe_dropout(x, train, drop, rng, pass.enc_embed_dropout);
  pass.encoder.resize(static_cast<std::size_t>(config_.enc_layers));
  Matrix<T> sub;
  for (int l = 0; l < config_.enc_layers; ++l) {
    auto& c = pass.encoder[static_cast<std::size_t>(l)];
    const auto& s = L.encoder[static_cast<std::size_t>(l)];
    layer_norm(x, vec(p, s.ln_attn.gain), vec(p, s.ln_attn.bias), c.attn_in, &c.ln_attn);
    attention_forward(p, s.self_attn, c.attn_in, c.attn_in, enc_shape, c.self_attn, sub);
    maybe_dropout(sub, train, drop, rng, c.attn_dropout);
    if (config_.residual_removed_enc_layer == l)
      x = sub;
    else
      x += sub;
    layer_norm(x, vec(p, s.ln_ffn.gain), vec(p, s.ln_ffn.bias), c.ffn_in, &c.ln_ffn);
    ffn_forward(p, s.ffn, c.ffn_in, c.ffn, sub);
    maybe_dropout(sub, train, drop, rng, c.ffn_dropout);
    x += sub;
  }
  layer_norm(x, vec(p, L.encoder_final.gain), vec(p, L.encoder_final.bias), pass.memory,
             &pass.encoder_final);
}

template <typename T>
Matrix<T> Transformer<T>::encode(const Batch& batch) const {
  check_batch(batch);
  ForwardPass<T> pass;
  run_encoder(batch, false, nullptr, pass);
  return std::move(pass.memory);
}

template <typename T>
ForwardPass<T> Transformer<T>::run(const Batch& batch, bool train, Rng* rng, std::vector<int> rows) const {
  check_batch(batch);
  const auto& p = params_;
  const auto& L = p.layout;
  const int d = config_.d_model;
  const double drop = config_.dropout_prob;
  ForwardPass<T> pass;
  pass.batch = batch.size;
  pass.enc_len = batch.enc_len;
  pass.dec_len = batch.dec_len;

  const AttentionShape self_shape{batch.size, batch.dec_len, batch.dec_len, config_.num_heads,
                                  config_.head_dim(), true, &batch.dec_lengths};
  const AttentionShape cross_shape{batch.size, batch.dec_len, batch.enc_len, config_.num_heads,
                                   config_.head_dim(), false, &batch.enc_lengths};

  run_encoder(batch, train, rng, pass);
  Matrix<T> sub;
  Matrix<T> y;
  embed(p, positions_, batch.decoder_input, batch.dec_lengths, batch.size, batch.dec_len, d, y);
  maybe_dropout(y, train, drop, rng, pass.dec_embed_dropout);
  pass.decoder.resize(static_cast<std::size_t>(config_.dec_layers));
  for (int l = 0; l < config_.dec_layers; ++l) {
    auto& c = pass.decoder[static_cast<std::size_t>(l)];
    const auto& s = L.decoder[static_cast<std::size_t>(l)];
    layer_norm(y, vec(p, s.ln_self.gain), vec(p, s.ln_self.bias), c.self_in, &c.ln_self);
    attention_forward(p, s.self_attn, c.self_in, c.self_in, self_shape, c.self_attn, sub);
    maybe_dropout(sub, train, drop, rng, c.self_dropout);
    y += sub;
    layer_norm(y, vec(p, s.ln_cross.gain), vec(p, s.ln_cross.bias), c.cross_in, &c.ln_cross);
    attention_forward(p, s.cross_attn, c.cross_in, pass.memory, cross_shape, c.cross_attn, sub);
    maybe_dropout(sub, train, drop, rng, c.cross_dropout);
    y += sub;
    layer_norm(y, vec(p, s.ln_ffn.gain), vec(p, s.ln_ffn.bias), c.ffn_in, &c.ln_ffn);
    ffn_forward(p, s.ffn, c.ffn_in, c.ffn, sub);
    maybe_dropout(sub, train, drop, rng, c.ffn_dropout);
    y += sub;
  }
  layer_norm(y, vec(p, L.decoder_final.gain), vec(p, L.decoder_final.bias), pass.decoder_out,
             &pass.decoder_final);

  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(batch.size * batch.dec_len));
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<int>(r);
  }
  Matrix<T> selected(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) selected.row(static_cast<Eigen::Index>(r)) = pass.decoder_out.row(rows[r]);
  pass.logits.noalias() = selected * mat(p, L.embedding).transpose();
  pass.rows = std::move(rows);
  return pass;
}

template <typename T>
Parameters<T> Transformer<T>::backward(const Batch& batch, const ForwardPass<T>& pass,
                                       const Matrix<T>& dlogits) const {
  const auto& p = params_;
  const auto& L = p.layout;
  const int d = config_.d_model;
  Parameters<T> g = Parameters<T>::zeros_like(p);

  const AttentionShape enc_shape{batch.size, batch.enc_len, batch.enc_len, config_.num_heads,
                                 config_.head_dim(), false, &batch.enc_lengths};
  const AttentionShape self_shape{batch.size, batch.dec_len, batch.dec_len, config_.num_heads,
                                  config_.head_dim(), true, &batch.dec_lengths};
  const AttentionShape cross_shape{batch.size, batch.dec_len, batch.enc_len, config_.num_heads,
                                   config_.head_dim(), false, &batch.enc_lengths};

  // tied output projection
  Matrix<T> selected(static_cast<Eigen::Index>(pass.rows.size()), d);
  for (std::size_t r = 0; r < pass.rows.size(); ++r) selected.row(static_cast<Eigen::Index>(r)) = pass.decoder_out.row(pass.rows[r]);
  mat(g, L.embedding).noalias() += dlogits.transpose() * selected;
  const Matrix<T> dselected = dlogits * mat(p, L.embedding);
  Matrix<T> dout = Matrix<T>::Zero(pass.decoder_out.rows(), d);
  for (std::size_t r = 0; r < pass.rows.size(); ++r) dout.row(pass.rows[r]) += dselected.row(static_cast<Eigen::Index>(r));

  Matrix<T> dy = Matrix<T>::Zero(dout.rows(), d);
  layer_norm_backward(dout, pass.decoder_final, vec(p, L.decoder_final.gain), vec(g, L.decoder_final.gain),
                      vec(g, L.decoder_final.bias), dy);

  Matrix<T> dmemory = Matrix<T>::Zero(pass.memory.rows(), d);
  for (int l = config_.dec_layers - 1; l >= 0; --l) {
    const auto& c = pass.decoder[static_cast<std::size_t>(l)];
    const auto& s = L.decoder[static_cast<std::size_t>(l)];

    Matrix<T> din = Matrix<T>::Zero(dy.rows(), d);
    ffn_backward(p, s.ffn, masked(dy, c.ffn_dropout), c.ffn_in, c.ffn, g, din);
    layer_norm_backward(din, c.ln_ffn, vec(p, s.ln_ffn.gain), vec(g, s.ln_ffn.gain), vec(g, s.ln_ffn.bias), dy);

    din.setZero();
    attention_backward(p, s.cross_attn, masked(dy, c.cross_dropout), c.cross_in, pass.memory, cross_shape,
                       c.cross_attn, g, din, dmemory);
    layer_norm_backward(din, c.ln_cross, vec(p, s.ln_cross.gain), vec(g, s.ln_cross.gain),
                        vec(g, s.ln_cross.bias), dy);

    din.setZero();
    attention_backward(p, s.self_attn, masked(dy, c.self_dropout), c.self_in, c.self_in, self_shape,
                       c.self_attn, g, din, din);
    layer_norm_backward(din, c.ln_self, vec(p, s.ln_self.gain), vec(g, s.ln_self.gain),
                        vec(g, s.ln_self.bias), dy);
  }
  embed_backward(g, masked(dy, pass.dec_embed_dropout), batch.decoder_input, batch.dec_lengths,
                 batch.size, batch.dec_len, d);

  Matrix<T> dx = Matrix<T>::Zero(pass.memory.rows(), d);
  layer_norm_backward(dmemory, pass.encoder_final, vec(p, L.encoder_final.gain), vec(g, L.encoder_final.gain),
                      vec(g, L.encoder_final.bias), dx);
  for (int l = config_.enc_layers - 1; l >= 0; --l) {
    const auto& c = pass.encoder[static_cast<std::size_t>(l)];
    const auto& s = L.encoder[static_cast<std::size_t>(l)];

    Matrix<T> din = Matrix<T>::Zero(dx.rows(), d);
    ffn_backward(p, s.ffn, masked(dx, c.ffn_dropout), c.ffn_in, c.ffn, g, din);
    layer_norm_backward(din, c.ln_ffn, vec(p, s.ln_ffn.gain), vec(g, s.ln_ffn.gain), vec(g, s.ln_ffn.bias), dx);

    din.setZero();
    attention_backward(p, s.self_attn, masked(dx, c.attn_dropout), c.attn_in, c.attn_in, enc_shape,
                       c.self_attn, g, din, din);
    // without the residual path the layer input only reaches the output through attention
    if (config_.residual_removed_enc_layer == l) dx.setZero();
    layer_norm_backward(din, c.ln_attn, vec(p, s.ln_attn.gain), vec(g, s.ln_attn.gain),
                        vec(g, s.ln_attn.bias), dx);
  }
  embed_backward(g, masked(dx, pass.enc_embed_dropout), batch.encoder_input, batch.enc_lengths,
                 batch.size, batch.enc_len, d);
  return g;
}

template <typename T>
double smoothed_cross_entropy(const Matrix<T>& logits, const std::vector<Token>& targets,
                              double label_smoothing, std::type_identity_t<Matrix<T>>* dlogits) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index v = logits.cols();
  if (n == 0) throw std::invalid_argument("no target tokens");
  if (static_cast<std::size_t>(n) != targets.size()) throw std::invalid_argument("target count mismatch");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
    throw std::invalid_argument("label smoothing must be in [0, 1)");
  if (dlogits) dlogits->resize(n, v);
  const double eps = label_smoothing;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = logits.row(r);
    const double mx = static_cast<double>(row.maxCoeff());
    double sum = 0.0;
    double row_sum = 0.0;
    for (Eigen::Index k = 0; k < v; ++k) {
      const double l = static_cast<double>(row(k));
      sum += std::exp(l - mx);
      row_sum += l;
    }
    const double lse = mx + std::log(sum);
    const Token y = targets[static_cast<std::size_t>(r)];
    total += (1.0 - eps) * (lse - static_cast<double>(row(y))) + eps * (lse - row_sum / static_cast<double>(v));
    if (dlogits) {
      const double uniform = eps / static_cast<double>(v);
      for (Eigen::Index k = 0; k < v; ++k) {
        double gk = std::exp(static_cast<double>(row(k)) - lse) - uniform;
        if (k == y) gk -= 1.0 - eps;
        (*dlogits)(r, k) = static_cast<T>(gk * inv_n);
      }
    }
  }
  const double loss = total * inv_n;
  if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
  return loss;
}

namespace {

std::vector<Token> targets_for(const Batch& batch, const std::vector<int>& rows) {
  std::vector<Token> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(batch.decoder_target[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

template <typename T>
Logits<T> forward(const Parameters<T>& params, const ModelConfig& config, const Batch& batch,
                  bool train_mode, Rng* rng) {
  const Transformer<T> net(config, params);
  auto pass = net.run(batch, train_mode, rng);
  Logits<T> out;
  out.batch = batch.size;
  out.length = batch.dec_len;
  out.vocab = config.vocab_size;
  out.values = std::move(pass.logits);
  return out;
}

template <typename T>
double compute_loss(const Parameters<T>& params, const ModelConfig& config, const Batch& batch,
                    double label_smoothing, bool train_mode, Rng* rng) {
  const Transformer<T> net(config, params);
  auto rows = Transformer<T>::target_rows(batch);
  if (rows.empty()) throw std::invalid_argument("batch has no target tokens");
  const auto pass = net.run(batch, train_mode, rng, rows);
  return smoothed_cross_entropy(pass.logits, targets_for(batch, pass.rows), label_smoothing, nullptr);
}

template <typename T>
LossAndGrads<T> loss_and_grads(const Parameters<T>& params, const ModelConfig& config,
                               const Batch& batch, double label_smoothing, Rng& rng) {
  const Transformer<T> net(config, params);
  auto rows = Transformer<T>::target_rows(batch);
  if (rows.empty()) throw std::invalid_argument("batch has no target tokens");
  const auto pass = net.run(batch, true, &rng, rows);
  Matrix<T> dlogits;
  LossAndGrads<T> out;
  out.loss = smoothed_cross_entropy(pass.logits, targets_for(batch, pass.rows), label_smoothing, &dlogits);
  out.tokens = pass.rows.size();
  out.grads = net.backward(batch, pass, dlogits);
  if (!out.grads.all_finite()) throw std::runtime_error("non-finite gradient");
  return out;
}

template class Transformer<float>;
template class Transformer<double>;
template Logits<float> forward<float>(const Parameters<float>&, const ModelConfig&, const Batch&, bool, Rng*);
template Logits<double> forward<double>(const Parameters<double>&, const ModelConfig&, const Batch&, bool, Rng*);
template double compute_loss<float>(const Parameters<float>&, const ModelConfig&, const Batch&, double, bool, Rng*);
template double compute_loss<double>(const Parameters<double>&, const ModelConfig&, const Batch&, double, bool, Rng*);
template LossAndGrads<float> loss_and_grads<float>(const Parameters<float>&, const ModelConfig&, const Batch&, double, Rng&);
template LossAndGrads<double> loss_and_grads<double>(const Parameters<double>&, const ModelConfig&, const Batch&, double, Rng&);
template double smoothed_cross_entropy<float>(const Matrix<float>&, const std::vector<Token>&, double, Matrix<float>*);
template double smoothed_cross_entropy<double>(const Matrix<double>&, const std::vector<Token>&, double, Matrix<double>*);

}  // namespace offtarget
