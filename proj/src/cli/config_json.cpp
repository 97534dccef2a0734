#include <cstdlib>
#include <fstream>

#include "offtarget/cli.hpp"
#include "offtarget/corpus_io.hpp"

namespace offtarget::cli {

namespace {

nlohmann::json sampling_to_json(const SamplingParams& s) {
  return {{"zipf_s", s.zipf_s}, {"min_len", s.min_len}, {"max_len", s.max_len}};
}

SamplingParams sampling_from_json(const nlohmann::json& j) {
  SamplingParams s;
  s.zipf_s = j.value("zipf_s", s.zipf_s);
  s.min_len = j.value("min_len", s.min_len);
  s.max_len = j.value("max_len", s.max_len);
  return s;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : fs::weakly_canonical(base / p);
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("manifest does not name a " + what);
  if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
}

void check_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_test";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

}  // namespace

Languages DataConfig::languages() const {
  auto rules = order_rules;
  if (rules.empty())
    for (int i = 0; i < num_langs; ++i) rules.push_back(i % 2 ? OrderRule::reverse_window(3) : OrderRule::identity());
  if (static_cast<int>(rules.size()) != num_langs) throw ConfigError("order_rules must list one rule per language");
  return build_languages(num_langs, concept_vocab, rules, language_seed);
}

CorpusSpec DataConfig::corpus_spec(const Languages& langs) const {
  CorpusSpec spec;
  spec.languages = langs;
  spec.centric_set = centric_set;
  spec.pair_sizes = pair_sizes.empty() ? centric_pair_sizes(num_langs, centric_set, pairs_per_direction) : pair_sizes;
  spec.sampling = sampling;
  spec.target_in_source_noise = target_in_source_noise;
  spec.seed = seed;
  return spec;
}

void DataConfig::validate() const {
  corpus_spec(languages()).validate();
  if (valid_size < 1 || test_size < 1) throw ConfigError("valid_size and test_size must be positive");
}

nlohmann::json to_json(const DataConfig& c) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : c.order_rules) rules.push_back(r.to_string());
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& [d, n] : c.pair_sizes) sizes.push_back({{"src", d.src}, {"tgt", d.tgt}, {"size", n}});
  return {{"num_langs", c.num_langs},
          {"concept_vocab", c.concept_vocab},
          {"order_rules", rules},
          {"language_seed", c.language_seed},
          {"centric_set", c.centric_set},
          {"pairs_per_direction", c.pairs_per_direction},
          {"pair_sizes", sizes},
          {"sampling", sampling_to_json(c.sampling)},
          {"target_in_source_noise", c.target_in_source_noise},
          {"seed", c.seed},
          {"valid_size", c.valid_size},
          {"test_size", c.test_size}};
}

DataConfig data_config_from_json(const nlohmann::json& j) {
  DataConfig c;
  c.num_langs = j.value("num_langs", c.num_langs);
  c.concept_vocab = j.value("concept_vocab", c.concept_vocab);
  if (j.contains("order_rules"))
    for (const auto& r : j.at("order_rules")) c.order_rules.push_back(OrderRule::from_string(r.get<std::string>()));
  c.language_seed = j.value("language_seed", c.language_seed);
  if (j.contains("centric_set")) c.centric_set = j.at("centric_set").get<std::vector<int>>();
  c.pairs_per_direction = j.value("pairs_per_direction", c.pairs_per_direction);
  if (j.contains("pair_sizes"))
    for (const auto& e : j.at("pair_sizes"))
      c.pair_sizes[{e.at("src").get<int>(), e.at("tgt").get<int>()}] = e.at("size").get<std::size_t>();
  if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
  c.target_in_source_noise = j.value("target_in_source_noise", c.target_in_source_noise);
  c.seed = j.value("seed", c.seed);
  c.valid_size = j.value("valid_size", c.valid_size);
  c.test_size = j.value("test_size", c.test_size);
  c.validate();
  return c;
}

nlohmann::json to_json(const DataIndex& index) {
  nlohmann::json train = nlohmann::json::array();
  for (const auto& f : index.train)
    train.push_back({{"src", f.direction.src}, {"tgt", f.direction.tgt}, {"file", f.file.generic_string()}, {"count", f.count}});
  return {{"config", to_json(index.config)},
          {"registry", index.registry.generic_string()},
          {"train", train},
          {"valid", index.valid.generic_string()},
          {"test", index.test.generic_string()}};
}

DataIndex data_index_from_json(const nlohmann::json& j, const fs::path& base) {
  DataIndex idx;
  idx.config = data_config_from_json(j.at("config"));
  idx.registry = resolve(base, j.at("registry").get<std::string>());
  for (const auto& e : j.at("train"))
    idx.train.push_back({{e.at("src").get<int>(), e.at("tgt").get<int>()},
                         resolve(base, e.at("file").get<std::string>()),
                         e.at("count").get<std::size_t>()});
  idx.valid = resolve(base, j.at("valid").get<std::string>());
  idx.test = resolve(base, j.at("test").get<std::string>());
  return idx;
}

nlohmann::json read_config_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
  try {
    return read_json_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

fs::path resolve_out(const std::optional<fs::path>& flag, const std::optional<fs::path>& configured) {
  if (flag) return *flag;
  if (auto e = env("OFFTARGET_OUT")) return *e;
  if (configured) return *configured;
  throw ConfigError("no output directory: pass --out, set OFFTARGET_OUT or give \"out\" in the config");
}

ExperimentManifest load_manifest(const fs::path& path, const Overrides& o) {
  const auto j = read_config_file(path);
  const fs::path base = fs::absolute(path).parent_path();
  ExperimentManifest m;
  m.source = fs::absolute(path);
  try {
    if (j.contains("data")) {
      const auto index_path = resolve(base, j.at("data").get<std::string>());
      const auto idx = data_index_from_json(read_config_file(index_path), index_path.parent_path());
      m.registry = idx.registry;
      for (const auto& f : idx.train) m.corpus.push_back(f.file);
      m.valid = idx.valid;
      m.test = idx.test;
      m.centric_set = idx.config.centric_set;
    }
    if (j.contains("registry")) m.registry = resolve(base, j.at("registry").get<std::string>());
    if (j.contains("corpus")) {
      m.corpus.clear();
      for (const auto& f : j.at("corpus")) m.corpus.push_back(resolve(base, f.get<std::string>()));
    }
    if (j.contains("valid")) m.valid = resolve(base, j.at("valid").get<std::string>());
    if (j.contains("test")) m.test = resolve(base, j.at("test").get<std::string>());
    if (j.contains("centric_set")) m.centric_set = j.at("centric_set").get<std::vector<int>>();

    require_file(m.registry, "language registry");
    const auto langs = read_registry(m.registry);
    for (const auto& f : m.corpus) require_file(f, "corpus file");
    for (const auto* p : {&m.valid, &m.test}) {
      require_file(*p, "multiway set");
      read_multiway(*p);
    }
    for (int c : m.centric_set)
      if (c < 0 || c >= static_cast<int>(langs.size())) throw ConfigError("centric language out of range");

    m.model = model_config_from_json(j.value("model", nlohmann::json::object()));
    if (m.model.vocab_size == 0) m.model.vocab_size = vocab_size(langs);
    if (m.model.vocab_size != vocab_size(langs))
      throw ConfigError("model vocab_size does not match the registry (" + std::to_string(vocab_size(langs)) + ")");
    m.model.validate();
    m.schedule = schedule_from_json(j.value("schedule", nlohmann::json::object()));
    m.scheme = tagging_scheme_from_string(j.value("scheme", std::string("src_tgt_tags")));

    const auto init = j.value("init", nlohmann::json("scratch"));
    if (init.is_string() && init.get<std::string>() == "scratch") {
      m.init = InitMode::Scratch;
    } else if (init.is_object() && init.contains("checkpoint")) {
      m.init = InitMode::Checkpoint;
      m.init_checkpoint = resolve(base, init.at("checkpoint").get<std::string>());
      require_file(m.init_checkpoint, "initial checkpoint");
      const auto header = read_checkpoint_header(m.init_checkpoint);
      auto arch = header.config;
      arch.dropout_prob = m.model.dropout_prob;
      arch.residual_removed_enc_layer = m.model.residual_removed_enc_layer;
      arch.precision = m.model.precision;
      if (arch != m.model) throw ConfigError("initial checkpoint architecture differs from the model config");
    } else {
      throw ConfigError("init must be \"scratch\" or {\"checkpoint\": PATH}");
    }
    m.init_seed = j.value("init_seed", m.init_seed);
    m.pretrain = pretrain_config_from_json(j.value("pretrain", nlohmann::json::object()));

    const auto ev = j.value("eval", nlohmann::json::object());
    m.curve_rows = ev.value("curve_rows", m.curve_rows);
    m.probe_inputs = ev.value("probe_inputs", m.probe_inputs);
    if (ev.contains("checkpoint")) m.eval_checkpoint = resolve(base, ev.at("checkpoint").get<std::string>());
    if (o.checkpoint) m.eval_checkpoint = fs::absolute(*o.checkpoint);

    const auto sw = j.value("sweep", nlohmann::json::object());
    if (sw.contains("axis")) m.sweep_axis = sweep_axis_from_string(sw.at("axis").get<std::string>());
    if (sw.contains("values")) m.sweep_values = sw.at("values").get<std::vector<double>>();
    if (o.sweep_axis) m.sweep_axis = sweep_axis_from_string(*o.sweep_axis);
    if (!o.sweep_values.empty()) m.sweep_values = o.sweep_values;

    if (o.seed) {
      m.schedule.seed = *o.seed;
      m.init_seed = *o.seed;
      m.pretrain.seed = *o.seed;
    }

    std::optional<fs::path> configured;
    if (j.contains("out")) configured = resolve(base, j.at("out").get<std::string>());
    m.out = fs::absolute(resolve_out(o.out, configured));

    m.threads = j.value("threads", m.threads);
    if (auto e = env("OFFTARGET_THREADS")) m.threads = std::stoi(*e);
    if (o.threads) m.threads = *o.threads;
    if (m.threads < 1) throw ConfigError("threads must be at least 1");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  check_writable(m.out);
  return m;
}

nlohmann::json to_json(const ExperimentManifest& m) {
  nlohmann::json corpus = nlohmann::json::array();
  for (const auto& f : m.corpus) corpus.push_back(f.generic_string());
  nlohmann::json j{{"registry", m.registry.generic_string()},
                   {"corpus", corpus},
                   {"valid", m.valid.generic_string()},
                   {"test", m.test.generic_string()},
                   {"centric_set", m.centric_set},
                   {"model", to_json(m.model)},
                   {"schedule", to_json(m.schedule)},
                   {"scheme", to_string(m.scheme)},
                   {"init_seed", m.init_seed},
                   {"pretrain", to_json(m.pretrain)},
                   {"eval", {{"curve_rows", m.curve_rows}, {"probe_inputs", m.probe_inputs}}},
                   {"out", m.out.generic_string()},
                   {"threads", m.threads}};
  if (m.init == InitMode::Scratch) j["init"] = "scratch";
  else j["init"] = {{"checkpoint", m.init_checkpoint.generic_string()}};
  if (m.eval_checkpoint) j["eval"]["checkpoint"] = m.eval_checkpoint->generic_string();
  if (m.sweep_axis) j["sweep"] = {{"axis", to_string(*m.sweep_axis)}, {"values", m.sweep_values}};
  return j;
}

ParallelCorpus load_corpus(const ExperimentManifest& m) {
  if (m.corpus.empty()) throw ConfigError("manifest lists no corpus files");
  ParallelCorpus all;
  const auto langs = read_registry(m.registry);
  for (const auto& f : m.corpus) {
    ParallelCorpus part;
    try {
      part = read_corpus_jsonl(f);
      for (const auto& p : part.pairs) check_pair(p, langs);
    } catch (const std::exception& e) {
      throw ConfigError("bad corpus file " + f.string() + ": " + e.what());
    }
    all.pairs.insert(all.pairs.end(), part.pairs.begin(), part.pairs.end());
  }
  return all;
}

}  // namespace offtarget::cli
