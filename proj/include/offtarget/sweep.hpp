#pragma once

#include <optional>
#include <string>
#include <vector>

#include "offtarget/trainer.hpp"

namespace offtarget {

enum class SweepAxis { GenSteps, XcRatio };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& text);

struct SweepPoint {
  double axis_value = 0.0;
  TrainSchedule schedule;
  std::optional<EvalReport> report;  // empty when the run failed
  CurveLog curve;
  std::string error;
};

/// One full run per axis value, all forked from a single trunk so that the
/// shared phase-1 prefix is trained once. The trunk must not have taken any
/// steps yet; its schedule supplies every setting except the swept one.
/// Points come back ordered by axis value. A failing point records its
/// error and the sweep moves on.
template <typename T>
std::vector<SweepPoint> run_sweep(const Trainer<T>& trunk, SweepAxis axis, std::vector<double> values,
                                  const CurveEvaluator<T>& final_eval);

/// The schedule a sweep point runs under.
TrainSchedule sweep_schedule(const TrainSchedule& base, SweepAxis axis, double value);

}  // namespace offtarget
