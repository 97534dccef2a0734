#include "offtarget/parameters.hpp"

#include <cmath>
#include <stdexcept>

#include "offtarget/rng.hpp"

namespace offtarget {

namespace {

struct LayoutBuilder {
  ParamLayout& layout;

  int add(const std::string& name, int rows, int cols) {
    TensorInfo info{name, rows, cols, layout.total};
    layout.total += info.size();
    layout.tensors.push_back(std::move(info));
    return static_cast<int>(layout.tensors.size()) - 1;
  }

  LayerNormSlots layer_norm(const std::string& prefix, int d) {
    return {add(prefix + ".gain", 1, d), add(prefix + ".bias", 1, d)};
  }

  AttentionSlots attention(const std::string& prefix, int d) {
    AttentionSlots s;
    s.wq = add(prefix + ".wq", d, d);
    s.bq = add(prefix + ".bq", 1, d);
    s.wk = add(prefix + ".wk", d, d);
    s.bk = add(prefix + ".bk", 1, d);
    s.wv = add(prefix + ".wv", d, d);
    s.bv = add(prefix + ".bv", 1, d);
    s.wo = add(prefix + ".wo", d, d);
    s.bo = add(prefix + ".bo", 1, d);
    return s;
  }

  FeedForwardSlots feed_forward(const std::string& prefix, int d, int f) {
    return {add(prefix + ".w1", d, f), add(prefix + ".b1", 1, f), add(prefix + ".w2", f, d),
            add(prefix + ".b2", 1, d)};
  }
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ParamLayout ParamLayout::build(const ModelConfig& config) {
  config.validate();
  ParamLayout layout;
  LayoutBuilder b{layout};
  const int d = config.d_model;
  const int f = config.ffn_dim;
  layout.embedding = b.add("embedding", config.vocab_size, d);
  for (int l = 0; l < config.enc_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    EncoderLayerSlots s;
    s.ln_attn = b.layer_norm(p + ".ln_attn", d);
    s.self_attn = b.attention(p + ".self_attn", d);
    s.ln_ffn = b.layer_norm(p + ".ln_ffn", d);
    s.ffn = b.feed_forward(p + ".ffn", d, f);
    layout.encoder.push_back(s);
  }
  layout.encoder_final = b.layer_norm("encoder.ln_final", d);
  for (int l = 0; l < config.dec_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    DecoderLayerSlots s;
    s.ln_self = b.layer_norm(p + ".ln_self", d);
    s.self_attn = b.attention(p + ".self_attn", d);
    s.ln_cross = b.layer_norm(p + ".ln_cross", d);
    s.cross_attn = b.attention(p + ".cross_attn", d);
    s.ln_ffn = b.layer_norm(p + ".ln_ffn", d);
    s.ffn = b.feed_forward(p + ".ffn", d, f);
    layout.decoder.push_back(s);
  }
  layout.decoder_final = b.layer_norm("decoder.ln_final", d);
  return layout;
}

int ParamLayout::find(const std::string& name) const {
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool ParamLayout::is_layer_norm_gain(int slot) const {
  return ends_with(tensors[static_cast<std::size_t>(slot)].name, ".gain");
}

bool ParamLayout::is_bias(int slot) const {
  const auto& n = tensors[static_cast<std::size_t>(slot)].name;
  return tensors[static_cast<std::size_t>(slot)].rows == 1 && !ends_with(n, ".gain");
}

template <typename T>
bool Parameters<T>::all_finite() const {
  for (T v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
Parameters<T> init_params(const ModelConfig& config, std::uint64_t seed) {
  Parameters<T> p = Parameters<T>::zeros(config);
  for (std::size_t i = 0; i < p.layout.tensors.size(); ++i) {
    const int slot = static_cast<int>(i);
    const auto& info = p.layout.tensors[i];
    auto values = p.tensor(slot);
    if (p.layout.is_layer_norm_gain(slot)) {
      for (auto& v : values) v = T(1);
      continue;
    }
    if (p.layout.is_bias(slot)) continue;
    double bound;
    if (slot == p.layout.embedding)
      bound = std::sqrt(3.0 / config.d_model);
    else
      bound = std::sqrt(6.0 / (info.rows + info.cols));
    Rng rng(derive_seed(seed, {0x1417, i}));
    for (auto& v : values) v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * bound);
  }
  return p;
}

template struct Parameters<float>;
template struct Parameters<double>;
template Parameters<float> init_params<float>(const ModelConfig&, std::uint64_t);
template Parameters<double> init_params<double>(const ModelConfig&, std::uint64_t);

}  // namespace offtarget
