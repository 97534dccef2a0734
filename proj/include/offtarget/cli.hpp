#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "offtarget/multiway.hpp"
#include "offtarget/pretrain.hpp"
#include "offtarget/sweep.hpp"

namespace offtarget::cli {

namespace fs = std::filesystem;

/// Bad flags, unreadable or invalid configuration. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Input of gen-data: languages, the pair layout and the held-out sets.
struct DataConfig {
  int num_langs = 6;
  int concept_vocab = 512;
  std::vector<OrderRule> order_rules;  // empty: alternate identity and reverse_window(3)
  std::uint64_t language_seed = 1;
  std::vector<int> centric_set{0};
  std::size_t pairs_per_direction = 20000;
  std::map<Direction, std::size_t> pair_sizes;  // overrides pairs_per_direction when non-empty
  SamplingParams sampling;
  double target_in_source_noise = 0.0;
  std::uint64_t seed = 2;
  std::size_t valid_size = 200;
  std::size_t test_size = 500;

  Languages languages() const;
  CorpusSpec corpus_spec(const Languages& languages) const;
  void validate() const;
};

nlohmann::json to_json(const DataConfig& c);
DataConfig data_config_from_json(const nlohmann::json& j);

struct PairFile {
  Direction direction;
  fs::path file;
  std::size_t count = 0;
};

/// data_index.json, written next to the generated files.
struct DataIndex {
  DataConfig config;
  fs::path registry;
  std::vector<PairFile> train;
  fs::path valid;
  fs::path test;
};

nlohmann::json to_json(const DataIndex& index);
/// Relative paths are resolved against base.
DataIndex data_index_from_json(const nlohmann::json& j, const fs::path& base);

enum class InitMode { Scratch, Checkpoint };

struct ExperimentManifest {
  fs::path source;  // the manifest file itself
  fs::path registry;
  std::vector<fs::path> corpus;
  fs::path valid;
  fs::path test;
  std::vector<int> centric_set;
  ModelConfig model;
  TrainSchedule schedule;
  TaggingScheme scheme = TaggingScheme::SrcTgtTags;
  InitMode init = InitMode::Scratch;
  fs::path init_checkpoint;
  std::uint64_t init_seed = 0;
  PretrainConfig pretrain;
  std::size_t curve_rows = 0;  // 0: the whole validation set
  std::size_t probe_inputs = 100;
  std::optional<fs::path> eval_checkpoint;
  std::optional<SweepAxis> sweep_axis;
  std::vector<double> sweep_values;
  fs::path out;
  int threads = 1;
};

/// Command-line settings that override the manifest.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<int> threads;
  std::optional<fs::path> checkpoint;
  std::optional<std::string> sweep_axis;
  std::vector<double> sweep_values;
};

/// Reads a manifest, applies overrides and the OFFTARGET_OUT / OFFTARGET_THREADS
/// environment, and checks that every referenced file exists and parses and
/// that the output directory is writable. Throws ConfigError.
ExperimentManifest load_manifest(const fs::path& path, const Overrides& overrides);

/// The resolved manifest with absolute paths; reloading it reproduces the run.
nlohmann::json to_json(const ExperimentManifest& m);

/// --out, then OFFTARGET_OUT, then the configured value.
fs::path resolve_out(const std::optional<fs::path>& flag, const std::optional<fs::path>& configured);

nlohmann::json read_config_file(const fs::path& path);

ParallelCorpus load_corpus(const ExperimentManifest& m);

int cmd_gen_data(const fs::path& config, const Overrides& o, std::ostream& out);
int cmd_pretrain(const ExperimentManifest& m, std::ostream& out);
int cmd_train(const ExperimentManifest& m, std::ostream& out);
int cmd_eval(const ExperimentManifest& m, std::ostream& out);
int cmd_probe(const ExperimentManifest& m, std::ostream& out);
int cmd_sweep(const ExperimentManifest& m, std::ostream& out);

/// Header: axis_value,sup_bleu,zs_bleu,zs_otr,otr_c,otr_src,status
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

/// Parses argv and runs one subcommand; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace offtarget::cli
