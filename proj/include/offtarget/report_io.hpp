#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "offtarget/evaluate.hpp"
#include "offtarget/probe.hpp"

namespace offtarget {

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// One row per direction:
/// src,tgt,supervised,n,bleu,otr,otr_c,otr_src,lang_0..lang_{L-1},none
void write_eval_csv(std::ostream& out, const EvalReport& report);

nlohmann::json to_json(const ProbeReport& report);
ProbeReport probe_report_from_json(const nlohmann::json& j);

/// One row per (source, condition): src,condition,n,lang_0..lang_{L-1},none
void write_probe_csv(std::ostream& out, const std::vector<ProbeReport>& reports);

}  // namespace offtarget
