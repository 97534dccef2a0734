#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "offtarget/cli.hpp"
#include "offtarget/corpus_io.hpp"
#include "offtarget/report_io.hpp"

namespace offtarget::cli {

namespace {

template <typename F>
auto with_precision(Precision p, F&& f) {
  if (p == Precision::F64) return f(double{});
  return f(float{});
}

void write_status(const fs::path& dir, const std::string& command, const std::string& status,
                  const std::string& error = {}) {
  nlohmann::json j{{"command", command}, {"status", status}};
  if (!error.empty()) j["error"] = error;
  write_json_file(dir / "status.json", j);
}

/// Runs body with status.json tracking; a failure leaves "failed" behind so
/// that partial outputs are recognizable.
template <typename F>
int tracked(const ExperimentManifest& m, const std::string& command, F&& body) {
  write_json_file(m.out / "manifest.json", to_json(m));
  write_status(m.out, command, "running");
  try {
    body();
  } catch (const std::exception& e) {
    write_status(m.out, command, "failed", e.what());
    throw;
  }
  write_status(m.out, command, "complete");
  return kExitOk;
}

MultiwayTestSet curve_set(const ExperimentManifest& m) {
  auto set = read_multiway(m.valid);
  return m.curve_rows > 0 ? set.head(m.curve_rows) : set;
}

template <typename T>
Parameters<T> initial_params(const ExperimentManifest& m) {
  if (m.init == InitMode::Scratch) return init_params<T>(m.model, m.init_seed);
  return read_checkpoint<T>(m.init_checkpoint).params;
}

fs::path eval_checkpoint(const ExperimentManifest& m) {
  const auto p = m.eval_checkpoint ? *m.eval_checkpoint : m.out / "final.ckpt";
  if (!fs::is_regular_file(p)) throw ConfigError("checkpoint not found: " + p.string());
  return p;
}

void print_report(std::ostream& out, const EvalReport& r) {
  out << "supervised BLEU " << r.sup_bleu;
  if (r.has_zero_shot)
    out << ", zero-shot BLEU " << r.zs_bleu << ", OTR " << r.zs_otr << " (centric " << r.zs_otr_c << ", source "
        << r.zs_otr_src << ")";
  out << '\n';
}

template <typename T>
void run_pretrain(const ExperimentManifest& m, std::ostream& out) {
  const auto langs = read_registry(m.registry);
  auto evaluator = multiway_evaluator<T>(m.model, m.scheme, curve_set(m), langs, m.centric_set);
  const auto r = pretrain<T>(langs, m.pretrain, m.model, m.init_seed, evaluator);
  write_curve_csv(m.out / "pretrain_curve.csv", r.curve);
  Checkpoint<T> ckpt;
  ckpt.config = m.model;
  ckpt.step = r.steps;
  ckpt.params = r.params;
  ckpt.metadata = {{"phase", "pretrain"}, {"pretrain", to_json(m.pretrain)}};
  write_checkpoint(m.out / "pretrain.ckpt", ckpt);
  out << "pretrained " << r.steps << " steps, final loss " << r.curve.rows.back().loss.value_or(0.0) << '\n';
}

template <typename T>
void run_train(const ExperimentManifest& m, std::ostream& out) {
  const auto langs = read_registry(m.registry);
  auto sampler = std::make_shared<const BatchSampler>(load_corpus(m), m.centric_set, m.scheme);
  Trainer<T> trainer(m.model, m.schedule, sampler, initial_params<T>(m));
  trainer.set_evaluator(multiway_evaluator<T>(m.model, m.scheme, curve_set(m), langs, m.centric_set));
  trainer.set_checkpoint_hook([&](const Trainer<T>& t, const std::string& tag) {
    write_checkpoint(m.out / (tag + ".ckpt"), t.checkpoint());
    out << tag << " checkpoint at step " << t.steps_done() << '\n';
  });
  try {
    trainer.run();
  } catch (...) {
    write_curve_csv(m.out / "curve.csv", trainer.curve());
    throw;
  }
  write_curve_csv(m.out / "curve.csv", trainer.curve());
  const auto& last = trainer.curve().rows.back();
  out << "trained " << trainer.steps_done() << " steps";
  if (last.zs_otr) out << ", zero-shot OTR " << *last.zs_otr;
  out << '\n';
}

template <typename T>
void run_eval(const ExperimentManifest& m, const fs::path& path, std::ostream& out) {
  const auto ckpt = read_checkpoint<T>(path);
  const auto langs = read_registry(m.registry);
  const auto report = evaluate(ckpt.params, ckpt.config, m.scheme, read_multiway(m.test), langs, m.centric_set);
  write_json_file(m.out / "eval_report.json", to_json(report));
  std::ofstream csv(m.out / "eval_report.csv", std::ios::binary);
  write_eval_csv(csv, report);
  if (!csv) throw std::runtime_error("failed writing eval_report.csv");
  print_report(out, report);
}

template <typename T>
void run_probe(const ExperimentManifest& m, const fs::path& path, std::ostream& out) {
  const auto ckpt = read_checkpoint<T>(path);
  const auto langs = read_registry(m.registry);
  const auto inputs = read_multiway(m.test).head(m.probe_inputs).rows;
  const int n = static_cast<int>(langs.size());
  std::vector<ProbeReport> reports;
  nlohmann::json all = nlohmann::json::array();
  for (int src = 0; src < n; ++src) {
    reports.push_back(tag_probe(ckpt.params, ckpt.config, m.scheme, inputs, src, default_conditions(src, n), langs));
    all.push_back(to_json(reports.back()));
    out << "source " << src << ": share in source language";
    for (const auto& row : reports.back().rows)
      out << ' ' << row.condition.label() << '=' << reports.back().source_share(row.condition);
    out << '\n';
  }
  write_json_file(m.out / "probe_report.json", all);
  std::ofstream csv(m.out / "probe.csv", std::ios::binary);
  write_probe_csv(csv, reports);
  if (!csv) throw std::runtime_error("failed writing probe.csv");
}

std::string pair_file_name(Direction d) {
  return "train/" + std::to_string(d.src) + "-" + std::to_string(d.tgt) + ".jsonl";
}

}  // namespace

int cmd_gen_data(const fs::path& config, const Overrides& o, std::ostream& out) {
  const auto j = read_config_file(config);
  DataConfig cfg;
  Languages langs;
  fs::path dir;
  try {
    cfg = data_config_from_json(j);
    if (o.seed) cfg.seed = *o.seed;
    langs = cfg.languages();
    std::optional<fs::path> configured;
    if (j.contains("out")) configured = fs::absolute(config).parent_path() / j.at("out").get<std::string>();
    dir = resolve_out(o.out, configured);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(config.string() + ": " + e.what());
  }

  const auto corpus = make_parallel_corpus(cfg.corpus_spec(langs));
  fs::create_directories(dir / "train");
  write_registry(dir / "registry.json", langs);

  DataIndex index;
  index.config = cfg;
  index.registry = "registry.json";
  std::map<Direction, ParallelCorpus> by_direction;
  for (const auto& p : corpus.pairs) by_direction[{p.src_lang, p.tgt_lang}].pairs.push_back(p);
  std::size_t total = 0;
  for (const auto& [d, part] : by_direction) {
    const auto name = pair_file_name(d);
    write_corpus_jsonl(dir / name, part);
    index.train.push_back({d, name, part.size()});
    out << d.src << "->" << d.tgt << ' ' << part.size() << '\n';
    total += part.size();
  }
  out << "total " << total << '\n';

  auto exclude = concept_set(corpus);
  const auto valid = make_multiway_set(cfg.concept_vocab, cfg.sampling, cfg.valid_size, derive_seed(cfg.seed, {0x7a1}), exclude);
  exclude.insert(valid.rows.begin(), valid.rows.end());
  const auto test = make_multiway_set(cfg.concept_vocab, cfg.sampling, cfg.test_size, derive_seed(cfg.seed, {0x7e5}), exclude);
  write_multiway(dir / "valid.json", valid);
  write_multiway(dir / "test.json", test);
  index.valid = "valid.json";
  index.test = "test.json";
  write_json_file(dir / "data_index.json", to_json(index));
  out << "valid " << valid.size() << ", test " << test.size() << " multiway rows\n";
  return kExitOk;
}

int cmd_pretrain(const ExperimentManifest& m, std::ostream& out) {
  return tracked(m, "pretrain", [&] { with_precision(m.model.precision, [&](auto t) { run_pretrain<decltype(t)>(m, out); }); });
}

int cmd_train(const ExperimentManifest& m, std::ostream& out) {
  return tracked(m, "train", [&] { with_precision(m.model.precision, [&](auto t) { run_train<decltype(t)>(m, out); }); });
}

int cmd_eval(const ExperimentManifest& m, std::ostream& out) {
  const auto path = eval_checkpoint(m);
  return tracked(m, "eval", [&] {
    with_precision(read_checkpoint_header(path).dtype, [&](auto t) { run_eval<decltype(t)>(m, path, out); });
  });
}

int cmd_probe(const ExperimentManifest& m, std::ostream& out) {
  const auto path = eval_checkpoint(m);
  return tracked(m, "probe", [&] {
    with_precision(read_checkpoint_header(path).dtype, [&](auto t) { run_probe<decltype(t)>(m, path, out); });
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic multilingual translation experiments"};
  app.require_subcommand(1);
  fs::path config;
  Overrides o;
  std::uint64_t seed = 0;
  fs::path out_dir;
  int threads = 1;
  std::string axis;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config or manifest")->required();
    sub->add_option("--seed", seed, "Override the seeds in the config");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    return sub;
  };
  auto* gen = common(app.add_subcommand("gen-data", "Generate languages, corpus and held-out sets"));
  auto* pre = common(app.add_subcommand("pretrain", "Denoising pretraining"));
  auto* train = common(app.add_subcommand("train", "Train on the manifest's corpus"));
  auto* eval = common(app.add_subcommand("eval", "Evaluate a checkpoint on the test set"));
  auto* probe = common(app.add_subcommand("probe", "Tag-manipulation probe"));
  auto* sweep = common(app.add_subcommand("sweep", "Sweep G or r from a shared phase-1 trunk"));
  fs::path ckpt;
  for (auto* sub : {eval, probe}) sub->add_option("--checkpoint", ckpt, "Checkpoint to load (default OUT/final.ckpt)");
  sweep->add_option("--axis", axis, "gen_steps or xc_ratio")->check(CLI::IsMember({"gen_steps", "xc_ratio"}));
  sweep->add_option("--values", o.sweep_values, "Axis values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--out")) o.out = out_dir;
  if (sub->count("--threads")) o.threads = threads;
  if (sub->get_option_no_throw("--checkpoint") && sub->count("--checkpoint")) o.checkpoint = ckpt;
  if (!axis.empty()) o.sweep_axis = axis;

  try {
    if (sub == gen) return cmd_gen_data(config, o, out);
    const auto m = load_manifest(config, o);
    if (sub == pre) return cmd_pretrain(m, out);
    if (sub == train) return cmd_train(m, out);
    if (sub == eval) return cmd_eval(m, out);
    if (sub == probe) return cmd_probe(m, out);
    return cmd_sweep(m, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace offtarget::cli
