#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace offtarget {

enum class Precision { F32, F64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& text);

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 64;
  int num_heads = 4;
  int ffn_dim = 256;
  int enc_layers = 2;
  int dec_layers = 2;
  int max_len = 32;
  double dropout_prob = 0.3;
  // when set, this encoder layer's self-attention output replaces its input
  std::optional<int> residual_removed_enc_layer;
  Precision precision = Precision::F32;

  int head_dim() const { return d_model / num_heads; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Middle encoder layer, the documented default for the residual-removal baseline.
int default_residual_removed_layer(const ModelConfig& config);

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; vocab_size may be filled in by the caller.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace offtarget
