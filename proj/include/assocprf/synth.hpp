#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "assocprf/queries.hpp"

namespace assocprf {

struct SynthConfig {
  std::size_t documents = 2000;
  std::size_t queries = 50;
  std::size_t planted = 20;  // queries with a planted expansion term
  std::size_t vocabulary = 6000;  // background words
  std::size_t min_length = 60;    // background tokens per document
  std::size_t max_length = 120;
  std::uint64_t seed = 20111;

  /// Throws std::invalid_argument when the corpus cannot hold the
  /// relevant sets or a field is out of range.
  void validate() const;
};

/// A query whose relevant documents all contain `expansion_term`. The "head"
/// relevant documents also contain the query terms, so the term co-occurs with
/// them in the top of the initial ranking; the "tail" relevant documents lack
/// the query terms and are only reachable through expansion. A non-relevant
/// decoy repeats the query terms and ranks above the head before expansion.
struct PlantedQuery {
  std::string qid;
  std::vector<std::string> query_terms;
  std::string expansion_term;
  std::vector<std::string> head_docs;
  std::vector<std::string> tail_docs;
};

struct QrelLine {
  std::string qid;
  std::string external_id;
  int relevance = 0;
};

struct SynthCorpus {
  std::vector<std::pair<std::string, std::string>> documents;  // external id, text
  std::vector<QueryText> queries;
  std::vector<QrelLine> qrels;
  std::vector<PlantedQuery> planted;
};

/// Deterministic for a given config on every platform: the generator uses
/// only mt19937_64 output and integer arithmetic.
SynthCorpus generate_synthetic(const SynthConfig& config);

/// Writes `corpus/*.txt`, `queries.tsv`, `qrels.txt` and `planted.tsv` under `out_dir`.
void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& out_dir);

/// planted.tsv: `qid<TAB>query terms<TAB>expansion term<TAB>head ids<TAB>tail ids`,
/// id lists separated by spaces.
std::vector<PlantedQuery> read_planted(const std::filesystem::path& path);

}  // namespace assocprf
