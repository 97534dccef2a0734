#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "json.hpp"
#include "offtarget/corpus.hpp"

namespace offtarget {

/// Concept sequences that are rendered into every language on demand.
struct MultiwayTestSet {
  std::vector<ConceptSeq> rows;
  std::uint64_t seed = 0;

  std::size_t size() const { return rows.size(); }
  /// The first n rows (all rows when n exceeds the size).
  MultiwayTestSet head(std::size_t n) const;

  friend bool operator==(const MultiwayTestSet&, const MultiwayTestSet&) = default;
};

std::set<ConceptSeq> concept_set(const ParallelCorpus& corpus);

/// Draws distinct rows that do not occur in `exclude`. Throws if the sampler
/// cannot find enough fresh rows.
MultiwayTestSet make_multiway_set(int concept_vocab_size, const SamplingParams& sampling,
                                  std::size_t size, std::uint64_t seed,
                                  const std::set<ConceptSeq>& exclude);

nlohmann::json to_json(const MultiwayTestSet& set);
MultiwayTestSet multiway_from_json(const nlohmann::json& j);
void write_multiway(const std::filesystem::path& path, const MultiwayTestSet& set);
MultiwayTestSet read_multiway(const std::filesystem::path& path);

}  // namespace offtarget
