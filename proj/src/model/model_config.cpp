#include "offtarget/model_config.hpp"

#include <cmath>
#include <stdexcept>

namespace offtarget {

std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& text) {
  if (text == "f32") return Precision::F32;
  if (text == "f64") return Precision::F64;
  throw std::invalid_argument("unknown precision '" + text + "'");
}

void ModelConfig::validate() const {
  if (vocab_size < 5) throw std::invalid_argument("vocab_size too small");
  if (d_model < 2 || num_heads < 1 || d_model % num_heads != 0)
    throw std::invalid_argument("d_model must be divisible by num_heads");
  if (d_model % 2 != 0) throw std::invalid_argument("d_model must be even for sinusoidal positions");
  if (ffn_dim < 1) throw std::invalid_argument("ffn_dim must be positive");
  if (enc_layers < 1 || dec_layers < 1) throw std::invalid_argument("need at least one layer each");
  if (max_len < 2) throw std::invalid_argument("max_len must be >= 2");
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0))
    throw std::invalid_argument("dropout_prob must be in [0, 1)");
  if (residual_removed_enc_layer &&
      (*residual_removed_enc_layer < 0 || *residual_removed_enc_layer >= enc_layers))
    throw std::invalid_argument("residual_removed_enc_layer must be < enc_layers");
}

int default_residual_removed_layer(const ModelConfig& config) { return config.enc_layers / 2; }

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json j{{"vocab_size", c.vocab_size},   {"d_model", c.d_model},
                   {"num_heads", c.num_heads},     {"ffn_dim", c.ffn_dim},
                   {"enc_layers", c.enc_layers},   {"dec_layers", c.dec_layers},
                   {"max_len", c.max_len},         {"dropout_prob", c.dropout_prob},
                   {"precision", to_string(c.precision)}};
  if (c.residual_removed_enc_layer)
    j["residual_removed_enc_layer"] = *c.residual_removed_enc_layer;
  else
    j["residual_removed_enc_layer"] = nullptr;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.d_model = j.value("d_model", c.d_model);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.enc_layers = j.value("enc_layers", c.enc_layers);
  c.dec_layers = j.value("dec_layers", c.dec_layers);
  c.max_len = j.value("max_len", c.max_len);
  c.dropout_prob = j.value("dropout_prob", c.dropout_prob);
  if (j.contains("precision")) c.precision = precision_from_string(j.at("precision").get<std::string>());
  if (j.contains("residual_removed_enc_layer")) {
    const auto& r = j.at("residual_removed_enc_layer");
    if (r.is_string() && r.get<std::string>() == "default")
      c.residual_removed_enc_layer = default_residual_removed_layer(c);
    else if (!r.is_null())
      c.residual_removed_enc_layer = r.get<int>();
  }
  return c;
}

}  // namespace offtarget
