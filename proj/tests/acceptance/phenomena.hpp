#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "offtarget/probe.hpp"
#include "offtarget/sweep.hpp"

namespace offtarget::acceptance {

/// Scale of the phenomenon runs. "full" is the documented default setting;
/// "desk" shrinks the vocabulary, corpus and step count so that all three
/// seeds finish in well under an hour on one core.
struct Profile {
  std::string name;
  int num_langs = 6;
  int concept_vocab = 512;
  std::size_t pairs_per_direction = 20000;
  std::int64_t total_steps = 20000;
  std::int64_t eval_every = 500;
  std::size_t curve_rows = 100;
  std::size_t final_rows = 400;
  std::int64_t pretrain_steps = 5000;
  std::size_t pretrain_size_per_lang = 20000;
  std::size_t probe_inputs = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  static Profile desk();
  static Profile full();
  /// ACCEPTANCE_PROFILE=full|desk, ACCEPTANCE_SEEDS=comma list
  static Profile from_environment();

  std::int64_t gen_steps() const { return total_steps / 10; }
  std::vector<double> g_sweep() const;
};

struct LabeledCurve {
  std::string label;
  CurveLog curve;
};

struct SeedRun {
  std::uint64_t seed = 0;
  // scratch, single-centric: G-sweep points ordered by G (first is the G = 0 baseline)
  std::vector<SweepPoint> g_sweep;
  // scratch, two centric languages
  EvalReport multi_centric;
  CurveLog multi_centric_curve;
  // denoising pretraining followed by finetuning on the single-centric corpus
  CurveLog pretrain_curve;
  std::map<std::string, double> probe_source_share;  // per condition, pooled over sources
  EvalReport pretrained_baseline;
  CurveLog pretrained_curve;
  // pretrained init, G = 0.1N, keyed by r
  std::map<double, EvalReport> ratio;
  std::map<double, CurveLog> ratio_curves;
  double seconds = 0.0;

  const SweepPoint& baseline() const { return g_sweep.front(); }
  const SweepPoint& gen_point(std::int64_t g) const;
  std::vector<LabeledCurve> curves() const;
};

/// Runs every phenomenon experiment for one seed. Progress goes to log.
SeedRun run_seed(const Profile& profile, std::uint64_t seed, std::ostream& log);

}  // namespace offtarget::acceptance
