#include "phenomena.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "offtarget/pretrain.hpp"

namespace offtarget::acceptance {

Profile Profile::desk() {
  Profile p;
  p.name = "desk";
  p.concept_vocab = 128;
  p.pairs_per_direction = 5000;
  p.total_steps = 4000;
  p.eval_every = 400;
  p.curve_rows = 48;
  p.final_rows = 200;
  p.pretrain_steps = 5000;
  p.pretrain_size_per_lang = 10000;
  p.probe_inputs = 100;
  return p;
}

Profile Profile::full() {
  Profile p;
  p.name = "full";
  return p;
}

Profile Profile::from_environment() {
  Profile p = desk();
  if (const char* name = std::getenv("ACCEPTANCE_PROFILE")) {
    const std::string n = name;
    if (n == "full") p = full();
    else if (n != "desk") throw std::invalid_argument("ACCEPTANCE_PROFILE must be desk or full");
  }
  if (const char* seeds = std::getenv("ACCEPTANCE_SEEDS")) {
    p.seeds.clear();
    std::stringstream in(seeds);
    for (std::string item; std::getline(in, item, ',');) p.seeds.push_back(std::stoull(item));
    if (p.seeds.empty()) throw std::invalid_argument("ACCEPTANCE_SEEDS is empty");
  }
  return p;
}

std::vector<double> Profile::g_sweep() const {
  const double n = static_cast<double>(total_steps);
  return {0.0, std::round(0.05 * n), std::round(0.1 * n), std::round(0.3 * n)};
}

const SweepPoint& SeedRun::gen_point(std::int64_t g) const {
  for (const auto& p : g_sweep)
    if (p.schedule.gen_steps == g) return p;
  throw std::out_of_range("no sweep point for G = " + std::to_string(g));
}

std::vector<LabeledCurve> SeedRun::curves() const {
  std::vector<LabeledCurve> out;
  for (const auto& p : g_sweep) out.push_back({"scratch G=" + std::to_string(p.schedule.gen_steps), p.curve});
  out.push_back({"scratch two-centric", multi_centric_curve});
  out.push_back({"denoising pretraining", pretrain_curve});
  out.push_back({"pretrained G=0", pretrained_curve});
  for (const auto& [r, c] : ratio_curves) {
    std::ostringstream label;
    label << "pretrained G=0.1N r=" << r;
    out.push_back({label.str(), c});
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Languages make_languages(const Profile& p, std::uint64_t seed) {
  std::vector<OrderRule> rules;
  for (int i = 0; i < p.num_langs; ++i) rules.push_back(i % 2 ? OrderRule::reverse_window(3) : OrderRule::identity());
  return build_languages(p.num_langs, p.concept_vocab, rules, derive_seed(seed, {1}));
}

ParallelCorpus make_corpus(const Profile& p, const Languages& langs, const std::vector<int>& centric,
                           std::uint64_t seed) {
  CorpusSpec spec;
  spec.languages = langs;
  spec.centric_set = centric;
  spec.pair_sizes = centric_pair_sizes(p.num_langs, centric, p.pairs_per_direction);
  spec.seed = derive_seed(seed, {2, centric.size()});
  return make_parallel_corpus(spec);
}

void summarize(std::ostream& log, const std::string& label, const EvalReport& r, double secs) {
  log << "  " << label << ": sup_bleu " << r.sup_bleu << " zs_bleu " << r.zs_bleu << " zs_otr " << r.zs_otr
      << " otr_c " << r.zs_otr_c << " otr_src " << r.zs_otr_src << " (" << secs << " s)\n"
      << std::flush;
}

}  // namespace

SeedRun run_seed(const Profile& p, std::uint64_t seed, std::ostream& log) {
  const auto t_start = Clock::now();
  SeedRun out;
  out.seed = seed;
  const auto langs = make_languages(p, seed);
  const std::vector<int> single{0};
  const std::vector<int> dual{0, 1};
  const auto corpus = make_corpus(p, langs, single, seed);
  const auto dual_corpus = make_corpus(p, langs, dual, seed);

  auto exclude = concept_set(corpus);
  exclude.merge(concept_set(dual_corpus));
  const SamplingParams sampling;
  const auto curve_set = make_multiway_set(p.concept_vocab, sampling, p.curve_rows, derive_seed(seed, {3}), exclude);
  const auto final_set = make_multiway_set(p.concept_vocab, sampling, p.final_rows, derive_seed(seed, {4}), exclude);

  ModelConfig model;
  model.vocab_size = vocab_size(langs);
  TrainSchedule schedule;
  schedule.total_steps = p.total_steps;
  schedule.gen_steps = 0;
  schedule.eval_every = p.eval_every;
  schedule.seed = derive_seed(seed, {5});
  const auto scheme = TaggingScheme::SrcTgtTags;
  const auto init = init_params<float>(model, derive_seed(seed, {6}));

  auto curve_eval = [&](const std::vector<int>& centric) {
    return multiway_evaluator<float>(model, scheme, curve_set, langs, centric);
  };
  auto final_eval = [&](const std::vector<int>& centric) {
    return multiway_evaluator<float>(model, scheme, final_set, langs, centric);
  };

  // scratch, single-centric, G-sweep sharing one phase-1 trunk
  auto t0 = Clock::now();
  {
    const auto sampler = std::make_shared<const BatchSampler>(corpus, single, scheme);
    Trainer<float> trunk(model, schedule, sampler, init);
    trunk.set_evaluator(curve_eval(single));
    out.g_sweep = run_sweep(trunk, SweepAxis::GenSteps, p.g_sweep(), final_eval(single));
    for (const auto& point : out.g_sweep) {
      if (!point.report) throw std::runtime_error("G-sweep point failed: " + point.error);
      summarize(log, "scratch G=" + std::to_string(point.schedule.gen_steps), *point.report, since(t0));
    }
  }

  // scratch, two centric languages
  t0 = Clock::now();
  {
    const auto sampler = std::make_shared<const BatchSampler>(dual_corpus, dual, scheme);
    Trainer<float> t(model, schedule, sampler, init);
    t.set_evaluator(curve_eval(dual));
    t.run();
    out.multi_centric = final_eval(dual)(t.params());
    out.multi_centric_curve = t.curve();
    summarize(log, "scratch two-centric", out.multi_centric, since(t0));
  }

  // denoising pretraining, the tag probe, then finetuning
  t0 = Clock::now();
  PretrainConfig pc;
  pc.steps = p.pretrain_steps;
  pc.eval_every = p.eval_every;
  pc.size_per_lang = p.pretrain_size_per_lang;
  pc.seed = derive_seed(seed, {7});
  const auto pre = pretrain<float>(langs, pc, model, derive_seed(seed, {6}), curve_eval(single));
  out.pretrain_curve = pre.curve;
  {
    std::map<std::string, std::pair<double, double>> pooled;
    const auto inputs = final_set.head(p.probe_inputs).rows;
    for (int src = 0; src < p.num_langs; ++src) {
      const auto report = tag_probe(pre.params, model, scheme, inputs, src, default_conditions(src, p.num_langs), langs);
      for (const auto& row : report.rows) {
        auto& [hits, total] = pooled[row.condition.label()];
        hits += static_cast<double>(row.histogram.counts[static_cast<std::size_t>(src)]);
        total += static_cast<double>(row.histogram.total());
      }
    }
    for (const auto& [label, ht] : pooled) out.probe_source_share[label] = ht.first / ht.second;
    log << "  pretraining (" << since(t0) << " s), probe source share:";
    for (const auto& [label, share] : out.probe_source_share) log << ' ' << label << '=' << share;
    log << '\n' << std::flush;
  }

  t0 = Clock::now();
  {
    const auto sampler = std::make_shared<const BatchSampler>(corpus, single, scheme);
    Trainer<float> trunk(model, schedule, sampler, pre.params);
    trunk.set_evaluator(curve_eval(single));
    auto gen = schedule;
    gen.gen_steps = p.gen_steps();
    trunk.run_until(gen.phase_boundary());
    for (const double r : {0.0, 0.001}) {
      auto branch = trunk;
      gen.xc_ratio = r;
      branch.set_schedule(gen);
      branch.run();
      out.ratio[r] = final_eval(single)(branch.params());
      out.ratio_curves[r] = branch.curve();
      std::ostringstream label;
      label << "pretrained G=0.1N r=" << r;
      summarize(log, label.str(), out.ratio[r], since(t0));
    }
    trunk.run();
    out.pretrained_baseline = final_eval(single)(trunk.params());
    out.pretrained_curve = trunk.curve();
    summarize(log, "pretrained G=0", out.pretrained_baseline, since(t0));
  }
  out.seconds = since(t_start);
  return out;
}

}  // namespace offtarget::acceptance
