#include <fstream>

#include "offtarget/cli.hpp"
#include "offtarget/corpus_io.hpp"
#include "offtarget/csv.hpp"

namespace offtarget::cli {

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  CsvWriter csv(out);
  csv.row({"axis_value", "sup_bleu", "zs_bleu", "zs_otr", "otr_c", "otr_src", "status"});
  for (const auto& p : points) {
    if (!p.report) {
      csv.row({CsvWriter::number(p.axis_value), "", "", "", "", "", "failed: " + p.error});
      continue;
    }
    const auto& r = *p.report;
    csv.row({CsvWriter::number(p.axis_value), CsvWriter::number(r.sup_bleu), CsvWriter::number(r.zs_bleu),
             CsvWriter::number(r.zs_otr), CsvWriter::number(r.zs_otr_c), CsvWriter::number(r.zs_otr_src), "ok"});
  }
}

namespace {

template <typename T>
std::vector<SweepPoint> sweep_points(const ExperimentManifest& m) {
  const auto langs = read_registry(m.registry);
  auto sampler = std::make_shared<const BatchSampler>(load_corpus(m), m.centric_set, m.scheme);
  Parameters<T> init = m.init == InitMode::Scratch ? init_params<T>(m.model, m.init_seed)
                                                   : read_checkpoint<T>(m.init_checkpoint).params;
  Trainer<T> trunk(m.model, m.schedule, sampler, std::move(init));
  auto valid = read_multiway(m.valid);
  if (m.curve_rows > 0) valid = valid.head(m.curve_rows);
  trunk.set_evaluator(multiway_evaluator<T>(m.model, m.scheme, valid, langs, m.centric_set));
  const auto final_eval = multiway_evaluator<T>(m.model, m.scheme, read_multiway(m.test), langs, m.centric_set);
  return run_sweep(trunk, *m.sweep_axis, m.sweep_values, final_eval);
}

}  // namespace

int cmd_sweep(const ExperimentManifest& m, std::ostream& out) {
  if (!m.sweep_axis) throw ConfigError("sweep needs an axis (--axis or \"sweep\": {\"axis\"})");
  if (m.sweep_values.empty()) throw ConfigError("sweep needs axis values");
  for (double v : m.sweep_values) {
    try {
      sweep_schedule(m.schedule, *m.sweep_axis, v);
    } catch (const std::exception& e) {
      throw ConfigError("invalid sweep value " + CsvWriter::number(v) + ": " + e.what());
    }
  }

  write_json_file(m.out / "manifest.json", to_json(m));
  write_json_file(m.out / "status.json", {{"command", "sweep"}, {"status", "running"}});
  std::vector<SweepPoint> points;
  try {
    points = m.model.precision == Precision::F64 ? sweep_points<double>(m) : sweep_points<float>(m);
  } catch (const std::exception& e) {
    write_json_file(m.out / "status.json", {{"command", "sweep"}, {"status", "failed"}, {"error", e.what()}});
    throw;
  }

  std::ofstream csv(m.out / "sweep.csv", std::ios::binary);
  write_sweep_csv(csv, points);
  fs::create_directories(m.out / "sweep_curves");
  std::size_t failed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    out << to_string(*m.sweep_axis) << '=' << CsvWriter::number(p.axis_value) << ": ";
    if (p.report) {
      write_curve_csv(m.out / "sweep_curves" / ("point_" + std::to_string(i) + ".csv"), p.curve);
      out << "zero-shot OTR " << p.report->zs_otr << ", supervised BLEU " << p.report->sup_bleu << '\n';
    } else {
      ++failed;
      out << "failed (" << p.error << ")\n";
    }
  }
  nlohmann::json status{{"command", "sweep"}, {"status", failed ? "partial" : "complete"}, {"failed_points", failed}};
  write_json_file(m.out / "status.json", status);
  return failed ? kExitRuntime : kExitOk;
}

}  // namespace offtarget::cli
