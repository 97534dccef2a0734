#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "json.hpp"
#include "offtarget/adam.hpp"
#include "offtarget/model_config.hpp"
#include "offtarget/parameters.hpp"

namespace offtarget {

// Checkpoint container, version 1:
//   bytes 0..7   magic "OTCKPT\0\1"
//   u32 LE       format version
//   u64 LE       header length H
//   H bytes      UTF-8 JSON header: {"format","version","dtype","step","config",
//                "tensors":[{"name","rows","cols","offset"}],"total",
//                "optimizer":null | {"step","beta1","beta2","eps"},"metadata"}
//   payload      parameter values, row-major, little-endian, dtype-sized;
//                then first and second moments when "optimizer" is non-null.

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
  ModelConfig config;
  std::int64_t step = 0;
  Parameters<T> params;
  std::optional<AdamState<T>> optimizer;
  nlohmann::json metadata = nlohmann::json::object();
};

struct CheckpointHeader {
  ModelConfig config;
  std::int64_t step = 0;
  Precision dtype = Precision::F32;
  bool has_optimizer = false;
  nlohmann::json metadata;
};

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Values stored in the other precision are converted on load.
template <typename T>
Checkpoint<T> read_checkpoint(const std::filesystem::path& path);

}  // namespace offtarget
