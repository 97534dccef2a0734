#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "offtarget/model_config.hpp"

namespace offtarget {

// Eigen picks vectorized reduction paths by address, so fixed alignment keeps
// results bit-reproducible across allocations.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

struct TensorInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  friend bool operator==(const TensorInfo&, const TensorInfo&) = default;
};

struct LayerNormSlots {
  int gain = -1;
  int bias = -1;
};

struct AttentionSlots {
  int wq = -1, bq = -1, wk = -1, bk = -1, wv = -1, bv = -1, wo = -1, bo = -1;
};

struct FeedForwardSlots {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};

struct EncoderLayerSlots {
  LayerNormSlots ln_attn;
  AttentionSlots self_attn;
  LayerNormSlots ln_ffn;
  FeedForwardSlots ffn;
};

struct DecoderLayerSlots {
  LayerNormSlots ln_self;
  AttentionSlots self_attn;
  LayerNormSlots ln_cross;
  AttentionSlots cross_attn;
  LayerNormSlots ln_ffn;
  FeedForwardSlots ffn;
};

/// Row-major tensor table for one ModelConfig. Weight matrices are stored
/// (in_features x out_features); biases and layer-norm vectors are 1 x n.
/// The embedding table (vocab x d_model) doubles as the output projection.
struct ParamLayout {
  std::vector<TensorInfo> tensors;
  std::size_t total = 0;
  int embedding = -1;
  std::vector<EncoderLayerSlots> encoder;
  LayerNormSlots encoder_final;
  std::vector<DecoderLayerSlots> decoder;
  LayerNormSlots decoder_final;

  static ParamLayout build(const ModelConfig& config);
  int find(const std::string& name) const;
  bool is_layer_norm_gain(int slot) const;
  bool is_bias(int slot) const;
};

template <typename T>
struct Parameters {
  ParamLayout layout;
  AlignedVector<T> values;

  static Parameters zeros(const ModelConfig& config) {
    Parameters p;
    p.layout = ParamLayout::build(config);
    p.values.assign(p.layout.total, T(0));
    return p;
  }

  static Parameters zeros_like(const Parameters& other) {
    Parameters p;
    p.layout = other.layout;
    p.values.assign(other.values.size(), T(0));
    return p;
  }

  T* data(int slot) { return values.data() + layout.tensors[static_cast<std::size_t>(slot)].offset; }
  const T* data(int slot) const {
    return values.data() + layout.tensors[static_cast<std::size_t>(slot)].offset;
  }
  std::span<T> tensor(int slot) {
    return {data(slot), layout.tensors[static_cast<std::size_t>(slot)].size()};
  }
  std::span<const T> tensor(int slot) const {
    return {data(slot), layout.tensors[static_cast<std::size_t>(slot)].size()};
  }

  bool all_finite() const;
};

/// Seeded init: Xavier-uniform matrices, U(+-sqrt(3/d)) embeddings, zero
/// biases, unit layer-norm gains.
template <typename T>
Parameters<T> init_params(const ModelConfig& config, std::uint64_t seed);

template <typename To, typename From>
Parameters<To> convert_params(const Parameters<From>& p) {
  Parameters<To> out;
  out.layout = p.layout;
  out.values.assign(p.values.begin(), p.values.end());
  return out;
}

}  // namespace offtarget
