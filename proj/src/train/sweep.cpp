#include "offtarget/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offtarget {

std::string to_string(SweepAxis axis) { return axis == SweepAxis::GenSteps ? "gen_steps" : "xc_ratio"; }

SweepAxis sweep_axis_from_string(const std::string& text) {
  if (text == "gen_steps") return SweepAxis::GenSteps;
  if (text == "xc_ratio") return SweepAxis::XcRatio;
  throw std::invalid_argument("unknown sweep axis: " + text);
}

TrainSchedule sweep_schedule(const TrainSchedule& base, SweepAxis axis, double value) {
  TrainSchedule s = base;
  if (axis == SweepAxis::GenSteps) {
    if (value < 0 || value != std::floor(value)) throw std::invalid_argument("gen_steps must be a non-negative integer");
    s.gen_steps = static_cast<std::int64_t>(value);
  } else {
    s.xc_ratio = value;
  }
  s.validate();
  return s;
}

template <typename T>
std::vector<SweepPoint> run_sweep(const Trainer<T>& trunk_in, SweepAxis axis, std::vector<double> values,
                                  const CurveEvaluator<T>& final_eval) {
  if (trunk_in.steps_done() != 0) throw std::invalid_argument("sweep trunk has already been trained");
  if (values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
  std::sort(values.begin(), values.end());
  std::vector<SweepPoint> points(values.size());
  const TrainSchedule base = trunk_in.schedule();
  for (std::size_t i = 0; i < values.size(); ++i) {
    points[i].axis_value = values[i];
    try {
      points[i].schedule = sweep_schedule(base, axis, values[i]);
    } catch (const std::exception& e) {
      points[i].error = e.what();
    }
  }

  // Visit points by increasing fork step so the trunk only moves forward.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].error.empty()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points[a].schedule.phase_boundary() < points[b].schedule.phase_boundary();
  });

  Trainer<T> trunk = trunk_in;
  // a G-sweep trunk stays in phase 1 until the last fork
  if (axis == SweepAxis::GenSteps) trunk.set_schedule(sweep_schedule(base, axis, 0));
  for (const std::size_t i : order) {
    auto& point = points[i];
    try {
      trunk.run_until(point.schedule.phase_boundary());
      Trainer<T> branch = trunk;
      branch.set_schedule(point.schedule);
      branch.run();
      point.curve = branch.curve();
      if (final_eval) point.report = final_eval(branch.params());
    } catch (const std::exception& e) {
      point.error = e.what();
      point.report.reset();
    }
  }
  return points;
}

template std::vector<SweepPoint> run_sweep<float>(const Trainer<float>&, SweepAxis, std::vector<double>,
                                                  const CurveEvaluator<float>&);
template std::vector<SweepPoint> run_sweep<double>(const Trainer<double>&, SweepAxis, std::vector<double>,
                                                   const CurveEvaluator<double>&);

}  // namespace offtarget
