#include "offtarget/report_io.hpp"

#include <ostream>
#include <stdexcept>

#include "offtarget/csv.hpp"

namespace offtarget {

namespace {

nlohmann::json histogram_json(const LanguageHistogram& h) {
  return {{"counts", h.counts}, {"fractions", h.fractions()}};
}

LanguageHistogram histogram_from_json(const nlohmann::json& j) {
  LanguageHistogram h;
  h.counts = j.at("counts").get<std::vector<std::size_t>>();
  if (h.counts.empty()) throw std::invalid_argument("histogram without buckets");
  return h;
}

std::vector<std::string> language_columns(std::size_t num_langs) {
  std::vector<std::string> cols;
  for (std::size_t l = 0; l < num_langs; ++l) cols.push_back("lang_" + std::to_string(l));
  cols.push_back("none");
  return cols;
}

nlohmann::json condition_json(const TagCondition& c) {
  nlohmann::json j{{"label", c.label()}};
  switch (c.kind) {
    case TagCondition::Kind::None:
      j["kind"] = "none";
      break;
    case TagCondition::Kind::SourceTag:
      j["kind"] = "source_tag";
      break;
    case TagCondition::Kind::Tag:
      j["kind"] = "tag";
      j["lang"] = c.lang;
      break;
  }
  return j;
}

TagCondition condition_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") return TagCondition::none();
  if (kind == "source_tag") return TagCondition::source_tag();
  if (kind == "tag") return TagCondition::tag(j.at("lang").get<int>());
  throw std::invalid_argument("unknown probe condition: " + kind);
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& d : r.directions) {
    dirs.push_back({{"src", d.direction.src},
                    {"tgt", d.direction.tgt},
                    {"supervised", d.supervised},
                    {"n", d.otr.n},
                    {"bleu", d.bleu},
                    {"otr", d.otr.otr},
                    {"otr_c", d.otr.otr_c},
                    {"otr_src", d.otr.otr_src},
                    {"output_languages", histogram_json(d.otr.histogram)}});
  }
  return {{"rows", r.rows},
          {"supervised",
           {{"bleu", r.sup_bleu}, {"bleu_to_centric", r.sup_bleu_to_centric}, {"bleu_from_centric", r.sup_bleu_from_centric}}},
          {"zero_shot",
           {{"present", r.has_zero_shot},
            {"bleu", r.zs_bleu},
            {"otr", r.zs_otr},
            {"otr_c", r.zs_otr_c},
            {"otr_src", r.zs_otr_src},
            {"otr_micro", r.zs_otr_micro},
            {"otr_c_micro", r.zs_otr_c_micro},
            {"otr_src_micro", r.zs_otr_src_micro}}},
          {"directions", dirs}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.rows = j.at("rows").get<std::size_t>();
  const auto& s = j.at("supervised");
  r.sup_bleu = s.at("bleu").get<double>();
  r.sup_bleu_to_centric = s.at("bleu_to_centric").get<double>();
  r.sup_bleu_from_centric = s.at("bleu_from_centric").get<double>();
  const auto& z = j.at("zero_shot");
  r.has_zero_shot = z.at("present").get<bool>();
  r.zs_bleu = z.at("bleu").get<double>();
  r.zs_otr = z.at("otr").get<double>();
  r.zs_otr_c = z.at("otr_c").get<double>();
  r.zs_otr_src = z.at("otr_src").get<double>();
  r.zs_otr_micro = z.at("otr_micro").get<double>();
  r.zs_otr_c_micro = z.at("otr_c_micro").get<double>();
  r.zs_otr_src_micro = z.at("otr_src_micro").get<double>();
  for (const auto& d : j.at("directions")) {
    DirectionReport dr;
    dr.direction = {d.at("src").get<int>(), d.at("tgt").get<int>()};
    dr.supervised = d.at("supervised").get<bool>();
    dr.bleu = d.at("bleu").get<double>();
    dr.otr.n = d.at("n").get<std::size_t>();
    dr.otr.otr = d.at("otr").get<double>();
    dr.otr.otr_c = d.at("otr_c").get<double>();
    dr.otr.otr_src = d.at("otr_src").get<double>();
    dr.otr.histogram = histogram_from_json(d.at("output_languages"));
    r.directions.push_back(std::move(dr));
  }
  return r;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  CsvWriter csv(out);
  const std::size_t L = report.directions.empty() ? 0 : report.directions.front().otr.histogram.none_bucket();
  std::vector<std::string> header{"src", "tgt", "supervised", "n", "bleu", "otr", "otr_c", "otr_src"};
  for (auto& c : language_columns(L)) header.push_back(c);
  csv.row(header);
  for (const auto& d : report.directions) {
    std::vector<std::string> row{std::to_string(d.direction.src), std::to_string(d.direction.tgt),
                                 d.supervised ? "1" : "0",          std::to_string(d.otr.n),
                                 CsvWriter::number(d.bleu),         CsvWriter::number(d.otr.otr),
                                 CsvWriter::number(d.otr.otr_c),    CsvWriter::number(d.otr.otr_src)};
    for (double f : d.otr.histogram.fractions()) row.push_back(CsvWriter::number(f));
    csv.row(row);
  }
}

nlohmann::json to_json(const ProbeReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows)
    rows.push_back({{"condition", condition_json(row.condition)}, {"output_languages", histogram_json(row.histogram)}});
  return {{"src_lang", report.src_lang}, {"inputs", report.inputs}, {"conditions", rows}};
}

ProbeReport probe_report_from_json(const nlohmann::json& j) {
  ProbeReport r;
  r.src_lang = j.at("src_lang").get<int>();
  r.inputs = j.at("inputs").get<std::size_t>();
  for (const auto& row : j.at("conditions")) {
    ProbeRow pr;
    pr.condition = condition_from_json(row.at("condition"));
    pr.histogram = histogram_from_json(row.at("output_languages"));
    pr.distribution = pr.histogram.fractions();
    r.rows.push_back(std::move(pr));
  }
  return r;
}

void write_probe_csv(std::ostream& out, const std::vector<ProbeReport>& reports) {
  CsvWriter csv(out);
  std::size_t L = 0;
  for (const auto& r : reports)
    if (!r.rows.empty()) L = r.rows.front().histogram.none_bucket();
  std::vector<std::string> header{"src", "condition", "n"};
  for (auto& c : language_columns(L)) header.push_back(c);
  csv.row(header);
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      std::vector<std::string> fields{std::to_string(r.src_lang), row.condition.label(),
                                      std::to_string(row.histogram.total())};
      for (double f : row.distribution) fields.push_back(CsvWriter::number(f));
      csv.row(fields);
    }
}

}  // namespace offtarget
