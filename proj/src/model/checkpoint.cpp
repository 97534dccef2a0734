#include "offtarget/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace offtarget {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'T', 'C', 'K', 'P', 'T', '\0', '\1'};

template <typename U>
void write_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U read_le(std::istream& in) {
  std::array<char, sizeof(U)> bytes;
  in.read(bytes.data(), bytes.size());
  if (!in) throw std::runtime_error("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  U value;
  std::memcpy(&value, bytes.data(), sizeof(U));
  return value;
}

template <typename T>
void write_values(std::ostream& out, const AlignedVector<T>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
  } else {
    for (T v : values) write_le(out, v);
  }
}

template <typename Stored, typename T>
void read_values(std::istream& in, AlignedVector<T>& values, std::size_t n) {
  std::vector<Stored> raw(n);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(Stored)));
    if (!in) throw std::runtime_error("truncated checkpoint payload");
  } else {
    for (auto& v : raw) v = read_le<Stored>(in);
  }
  values.assign(raw.begin(), raw.end());
}

template <typename T>
constexpr Precision dtype_of() {
  return std::is_same_v<T, float> ? Precision::F32 : Precision::F64;
}

nlohmann::json read_header_json(std::istream& in, const std::filesystem::path& path) {
  std::array<char, 8> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a checkpoint");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto len = read_le<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("truncated checkpoint header");
  return nlohmann::json::parse(text);
}

}  // namespace

template <typename T>
void write_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : ckpt.params.layout.tensors)
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
  nlohmann::json header{{"format", "offtarget-checkpoint"},
                        {"version", kCheckpointVersion},
                        {"dtype", to_string(dtype_of<T>())},
                        {"step", ckpt.step},
                        {"config", to_json(ckpt.config)},
                        {"tensors", tensors},
                        {"total", ckpt.params.values.size()},
                        {"metadata", ckpt.metadata}};
  if (ckpt.optimizer) {
    header["optimizer"] = {{"step", ckpt.optimizer->step},
                           {"beta1", ckpt.optimizer->beta1},
                           {"beta2", ckpt.optimizer->beta2},
                           {"eps", ckpt.optimizer->eps}};
  } else {
    header["optimizer"] = nullptr;
  }
  const std::string text = header.dump();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    write_le<std::uint32_t>(out, kCheckpointVersion);
    write_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_values(out, ckpt.params.values);
    if (ckpt.optimizer) {
      write_values(out, ckpt.optimizer->first_moment);
      write_values(out, ckpt.optimizer->second_moment);
    }
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto j = read_header_json(in, path);
  CheckpointHeader h;
  h.config = model_config_from_json(j.at("config"));
  h.step = j.at("step").get<std::int64_t>();
  h.dtype = precision_from_string(j.at("dtype").get<std::string>());
  h.has_optimizer = !j.at("optimizer").is_null();
  h.metadata = j.value("metadata", nlohmann::json::object());
  return h;
}

template <typename T>
Checkpoint<T> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto j = read_header_json(in, path);
  Checkpoint<T> ckpt;
  ckpt.config = model_config_from_json(j.at("config"));
  ckpt.step = j.at("step").get<std::int64_t>();
  ckpt.metadata = j.value("metadata", nlohmann::json::object());
  ckpt.params = Parameters<T>::zeros(ckpt.config);
  const auto& tensors = j.at("tensors");
  if (tensors.size() != ckpt.params.layout.tensors.size())
    throw std::runtime_error("checkpoint tensor table does not match its config");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& info = ckpt.params.layout.tensors[i];
    if (tensors[i].at("name").get<std::string>() != info.name || tensors[i].at("rows").get<int>() != info.rows ||
        tensors[i].at("cols").get<int>() != info.cols || tensors[i].at("offset").get<std::size_t>() != info.offset)
      throw std::runtime_error("checkpoint tensor '" + info.name + "' has an unexpected shape");
  }
  const std::size_t n = ckpt.params.values.size();
  const Precision dtype = precision_from_string(j.at("dtype").get<std::string>());
  auto read_block = [&](AlignedVector<T>& dst) {
    if (dtype == Precision::F32)
      read_values<float>(in, dst, n);
    else
      read_values<double>(in, dst, n);
  };
  read_block(ckpt.params.values);
  if (!j.at("optimizer").is_null()) {
    AdamState<T> s;
    const auto& o = j.at("optimizer");
    s.step = o.at("step").get<std::int64_t>();
    s.beta1 = o.at("beta1").get<double>();
    s.beta2 = o.at("beta2").get<double>();
    s.eps = o.at("eps").get<double>();
    read_block(s.first_moment);
    read_block(s.second_moment);
    ckpt.optimizer = std::move(s);
  }
  return ckpt;
}

template void write_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void write_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> read_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> read_checkpoint<double>(const std::filesystem::path&);

}  // namespace offtarget
