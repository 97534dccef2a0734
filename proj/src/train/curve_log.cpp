#include "offtarget/curve_log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "offtarget/csv.hpp"

namespace offtarget {

namespace {

const std::vector<std::string> kHeader{"step", "phase", "sup_bleu", "zs_bleu", "zs_otr",
                                       "zs_otr_c", "zs_otr_src", "loss", "lr"};

std::string field(const std::optional<double>& v) { return v ? CsvWriter::number(*v) : std::string(); }

std::optional<double> parse_field(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("curve log: bad number '" + s + "'");
  return v;
}

}  // namespace

void CurveRow::set_metrics(const EvalReport& report) {
  sup_bleu = report.sup_bleu;
  if (report.has_zero_shot) {
    zs_bleu = report.zs_bleu;
    zs_otr = report.zs_otr;
    zs_otr_c = report.zs_otr_c;
    zs_otr_src = report.zs_otr_src;
  }
}

void write_curve_csv(std::ostream& out, const CurveLog& log) {
  CsvWriter csv(out);
  csv.row(kHeader);
  for (const auto& r : log.rows)
    csv.row({std::to_string(r.step), to_string(r.phase), field(r.sup_bleu), field(r.zs_bleu), field(r.zs_otr),
             field(r.zs_otr_c), field(r.zs_otr_src), field(r.loss), CsvWriter::number(r.lr)});
}

void write_curve_csv(const std::filesystem::path& path, const CurveLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_curve_csv(out, log);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CurveLog read_curve_csv(std::istream& in) {
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str());
  if (rows.empty() || rows.front() != kHeader) throw std::invalid_argument("curve log: unexpected header");
  CurveLog log;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != kHeader.size()) throw std::invalid_argument("curve log: wrong field count");
    CurveRow r;
    r.step = std::stoll(f[0]);
    r.phase = phase_from_string(f[1]);
    r.sup_bleu = parse_field(f[2]);
    r.zs_bleu = parse_field(f[3]);
    r.zs_otr = parse_field(f[4]);
    r.zs_otr_c = parse_field(f[5]);
    r.zs_otr_src = parse_field(f[6]);
    r.loss = parse_field(f[7]);
    r.lr = parse_field(f[8]).value_or(0.0);
    log.rows.push_back(r);
  }
  return log;
}

CurveLog read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_curve_csv(in);
}

}  // namespace offtarget
