#include "offtarget/multiway.hpp"

#include <stdexcept>

#include "offtarget/corpus_io.hpp"
#include "offtarget/rng.hpp"

namespace offtarget {

MultiwayTestSet MultiwayTestSet::head(std::size_t n) const {
  MultiwayTestSet out;
  out.seed = seed;
  out.rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(n, rows.size())));
  return out;
}

std::set<ConceptSeq> concept_set(const ParallelCorpus& corpus) {
  std::set<ConceptSeq> out;
  for (const auto& p : corpus.pairs) out.insert(p.concepts);
  return out;
}

MultiwayTestSet make_multiway_set(int concept_vocab_size, const SamplingParams& sampling,
                                  std::size_t size, std::uint64_t seed,
                                  const std::set<ConceptSeq>& exclude) {
  if (size == 0) throw std::invalid_argument("multiway set must have at least one row");
  const ConceptSampler sampler(concept_vocab_size, sampling);
  Rng rng(derive_seed(seed, {0x3a7}));
  MultiwayTestSet out;
  out.seed = seed;
  std::set<ConceptSeq> seen;
  const std::size_t budget = 1000 * size + 10000;
  for (std::size_t attempt = 0; out.rows.size() < size; ++attempt) {
    if (attempt == budget) throw std::runtime_error("multiway set: could not draw enough unseen rows");
    auto row = sampler.sample_sentence(rng);
    if (exclude.count(row) || !seen.insert(row).second) continue;
    out.rows.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const MultiwayTestSet& set) {
  return {{"seed", set.seed}, {"rows", set.rows}};
}

MultiwayTestSet multiway_from_json(const nlohmann::json& j) {
  MultiwayTestSet set;
  set.seed = j.at("seed").get<std::uint64_t>();
  set.rows = j.at("rows").get<std::vector<ConceptSeq>>();
  for (const auto& row : set.rows)
    for (auto c : row)
      if (c < 0) throw std::invalid_argument("multiway set: negative concept id");
  return set;
}

void write_multiway(const std::filesystem::path& path, const MultiwayTestSet& set) {
  write_json_file(path, to_json(set));
}

MultiwayTestSet read_multiway(const std::filesystem::path& path) {
  return multiway_from_json(read_json_file(path));
}

}  // namespace offtarget
