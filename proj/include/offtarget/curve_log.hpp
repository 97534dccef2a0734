#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "offtarget/evaluate.hpp"
#include "offtarget/schedule.hpp"

namespace offtarget {

/// One learning-curve point. `loss` is the mean training loss over the steps
/// since the previous point and is absent at step 0; the metric fields are
/// absent when no evaluator was attached.
struct CurveRow {
  std::int64_t step = 0;
  Phase phase = Phase::Standard;
  std::optional<double> sup_bleu;
  std::optional<double> zs_bleu;
  std::optional<double> zs_otr;
  std::optional<double> zs_otr_c;
  std::optional<double> zs_otr_src;
  std::optional<double> loss;
  double lr = 0.0;

  void set_metrics(const EvalReport& report);

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

struct CurveLog {
  std::vector<CurveRow> rows;

  friend bool operator==(const CurveLog&, const CurveLog&) = default;
};

/// Header: step,phase,sup_bleu,zs_bleu,zs_otr,zs_otr_c,zs_otr_src,loss,lr
void write_curve_csv(std::ostream& out, const CurveLog& log);
void write_curve_csv(const std::filesystem::path& path, const CurveLog& log);
CurveLog read_curve_csv(std::istream& in);
CurveLog read_curve_csv(const std::filesystem::path& path);

}  // namespace offtarget
