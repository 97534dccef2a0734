#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "offtarget/corpus.hpp"

namespace offtarget {

// Corpus files are JSON lines, one pair per line:
//   {"src_lang":0,"tgt_lang":1,"src":[...],"tgt":[...],"concepts":[...],"kind":"supervised"}
// The registry is a single JSON object:
//   {"languages":[{"lang_id","tag_token","surface_base","perm","order_rule"}],
//    "specials":{"pad","bos","eos","mask"}}

nlohmann::json pair_to_json(const SentencePair& pair);
SentencePair pair_from_json(const nlohmann::json& j);

void write_corpus_jsonl(std::ostream& out, const ParallelCorpus& corpus);
void write_corpus_jsonl(const std::filesystem::path& path, const ParallelCorpus& corpus);
ParallelCorpus read_corpus_jsonl(std::istream& in);
ParallelCorpus read_corpus_jsonl(const std::filesystem::path& path);

nlohmann::json registry_to_json(const Languages& languages);
Languages registry_from_json(const nlohmann::json& j);

void write_registry(const std::filesystem::path& path, const Languages& languages);
Languages read_registry(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace offtarget
