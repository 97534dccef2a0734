#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "offtarget/batch.hpp"
#include "offtarget/model_config.hpp"
#include "offtarget/parameters.hpp"
#include "offtarget/rng.hpp"

namespace offtarget {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Activation caches kept by a training forward pass. Rows of every matrix
// are (sequence, position) pairs in batch-major order.

template <typename T>
struct LayerNormCache {
  Matrix<T> normalized;
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
};

template <typename T>
struct AttentionCache {
  Matrix<T> query, key, value, context;
  // (batch, head, query, key) softmax weights; masked keys hold exact zeros
  AlignedVector<T> probs;
  int q_len = 0;
  int k_len = 0;

  T prob(int b, int h, int i, int j, int heads) const {
    return probs[((static_cast<std::size_t>(b) * heads + h) * q_len + i) * k_len + j];
  }
};

template <typename T>
struct FeedForwardCache {
  Matrix<T> pre_activation;
  Matrix<T> hidden;
};

template <typename T>
struct EncoderLayerCache {
  LayerNormCache<T> ln_attn;
  Matrix<T> attn_in;
  AttentionCache<T> self_attn;
  Matrix<T> attn_dropout;
  LayerNormCache<T> ln_ffn;
  Matrix<T> ffn_in;
  FeedForwardCache<T> ffn;
  Matrix<T> ffn_dropout;
};

template <typename T>
struct DecoderLayerCache {
  LayerNormCache<T> ln_self;
  Matrix<T> self_in;
  AttentionCache<T> self_attn;
  Matrix<T> self_dropout;
  LayerNormCache<T> ln_cross;
  Matrix<T> cross_in;
  AttentionCache<T> cross_attn;
  Matrix<T> cross_dropout;
  LayerNormCache<T> ln_ffn;
  Matrix<T> ffn_in;
  FeedForwardCache<T> ffn;
  Matrix<T> ffn_dropout;
};

template <typename T>
struct ForwardPass {
  int batch = 0;
  int enc_len = 0;
  int dec_len = 0;
  Matrix<T> enc_embed_dropout;
  Matrix<T> dec_embed_dropout;
  std::vector<EncoderLayerCache<T>> encoder;
  LayerNormCache<T> encoder_final;
  Matrix<T> memory;
  std::vector<DecoderLayerCache<T>> decoder;
  LayerNormCache<T> decoder_final;
  Matrix<T> decoder_out;
  // decoder rows (b * dec_len + t) whose logits were computed
  std::vector<int> rows;
  Matrix<T> logits;
};

/// Logits for every decoder position; row b * length + t.
template <typename T>
struct Logits {
  int batch = 0;
  int length = 0;
  int vocab = 0;
  Matrix<T> values;

  T at(int b, int t, int v) const { return values(b * length + t, v); }
};

template <typename T>
struct LossAndGrads {
  double loss = 0.0;
  std::size_t tokens = 0;
  Parameters<T> grads;
};

/// Pre-norm encoder-decoder with tied embeddings and sinusoidal positions.
template <typename T>
class Transformer {
 public:
  Transformer(const ModelConfig& config, const Parameters<T>& params);

  /// `rows` empty means every decoder position. Dropout is applied only when
  /// train is set, drawing from `rng`.
  ForwardPass<T> run(const Batch& batch, bool train, Rng* rng, std::vector<int> rows = {}) const;

  /// Gradients of sum(dlogits .* logits) with respect to every parameter.
  Parameters<T> backward(const Batch& batch, const ForwardPass<T>& pass, const Matrix<T>& dlogits) const;

  /// Eval-mode encoder output (batch * enc_len x d_model).
  Matrix<T> encode(const Batch& batch) const;

  /// Rows of a batch whose targets count toward the loss.
  static std::vector<int> target_rows(const Batch& batch);

  const ModelConfig& config() const { return config_; }
  const Parameters<T>& params() const { return params_; }

 private:
  void check_batch(const Batch& batch) const;
  void run_encoder(const Batch& batch, bool train, Rng* rng, ForwardPass<T>& pass) const;

  const ModelConfig& config_;
  const Parameters<T>& params_;
  Matrix<T> positions_;
};

template <typename T>
Logits<T> forward(const Parameters<T>& params, const ModelConfig& config, const Batch& batch,
                  bool train_mode, Rng* rng);

/// Mean label-smoothed cross-entropy over non-PAD targets. The smoothing
/// mass is spread uniformly over the whole vocabulary.
template <typename T>
double compute_loss(const Parameters<T>& params, const ModelConfig& config, const Batch& batch,
                    double label_smoothing, bool train_mode, Rng* rng);

template <typename T>
LossAndGrads<T> loss_and_grads(const Parameters<T>& params, const ModelConfig& config,
                               const Batch& batch, double label_smoothing, Rng& rng);

/// Loss and d(loss)/d(logits) for logits already restricted to target rows.
template <typename T>
double smoothed_cross_entropy(const Matrix<T>& logits, const std::vector<Token>& targets,
                              double label_smoothing, std::type_identity_t<Matrix<T>>* dlogits);

Matrix<double> sinusoidal_positions(int max_len, int d_model);

}  // namespace offtarget
