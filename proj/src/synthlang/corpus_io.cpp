#include "offtarget/corpus_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace offtarget {

using nlohmann::json;

json pair_to_json(const SentencePair& pair) {
  json j;
  j["src_lang"] = pair.src_lang;
  j["tgt_lang"] = pair.tgt_lang;
  j["src"] = pair.src_tokens;
  j["tgt"] = pair.tgt_tokens;
  j["concepts"] = pair.concepts;
  j["kind"] = to_string(pair.kind);
  return j;
}

SentencePair pair_from_json(const json& j) {
  SentencePair p;
  p.src_lang = j.at("src_lang").get<int>();
  p.tgt_lang = j.at("tgt_lang").get<int>();
  p.src_tokens = j.at("src").get<TokenSeq>();
  p.tgt_tokens = j.at("tgt").get<TokenSeq>();
  p.concepts = j.at("concepts").get<ConceptSeq>();
  p.kind = pair_kind_from_string(j.at("kind").get<std::string>());
  for (Token t : p.src_tokens)
    if (t < 0) throw std::invalid_argument("negative token id in corpus");
  for (Token t : p.tgt_tokens)
    if (t < 0) throw std::invalid_argument("negative token id in corpus");
  return p;
}

void write_corpus_jsonl(std::ostream& out, const ParallelCorpus& corpus) {
  for (const auto& p : corpus.pairs) out << pair_to_json(p).dump() << '\n';
}

void write_corpus_jsonl(const std::filesystem::path& path, const ParallelCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_corpus_jsonl(out, corpus);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ParallelCorpus read_corpus_jsonl(std::istream& in) {
  ParallelCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.pairs.push_back(pair_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

ParallelCorpus read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_corpus_jsonl(in);
}

json registry_to_json(const Languages& languages) {
  json langs = json::array();
  for (const auto& l : languages) {
    langs.push_back({{"lang_id", l.lang_id},
                     {"tag_token", l.tag_token},
                     {"surface_base", l.surface_base},
                     {"perm", l.concept_perm},
                     {"order_rule", l.order_rule.to_string()}});
  }
  return {{"languages", langs},
          {"specials",
           {{"pad", Specials::kPad},
            {"bos", Specials::kBos},
            {"eos", Specials::kEos},
            {"mask", Specials::kMask}}}};
}

Languages registry_from_json(const json& j) {
  const auto& sp = j.at("specials");
  if (sp.at("pad").get<Token>() != Specials::kPad || sp.at("bos").get<Token>() != Specials::kBos ||
      sp.at("eos").get<Token>() != Specials::kEos || sp.at("mask").get<Token>() != Specials::kMask)
    throw std::invalid_argument("registry uses an unsupported special-token layout");
  Languages langs;
  for (const auto& e : j.at("languages")) {
    LanguageSpec l;
    l.lang_id = e.at("lang_id").get<int>();
    l.tag_token = e.at("tag_token").get<Token>();
    l.surface_base = e.at("surface_base").get<Token>();
    l.concept_perm = e.at("perm").get<std::vector<std::int32_t>>();
    l.order_rule = OrderRule::from_string(e.at("order_rule").get<std::string>());
    langs.push_back(std::move(l));
  }
  validate_languages(langs);
  return langs;
}

void write_registry(const std::filesystem::path& path, const Languages& languages) {
  write_json_file(path, registry_to_json(languages));
}

Languages read_registry(const std::filesystem::path& path) {
  return registry_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace offtarget
