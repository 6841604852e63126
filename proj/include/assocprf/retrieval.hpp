#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "assocprf/index.hpp"

namespace assocprf {

/// Ordered set of unique terms, first-occurrence order.
class Query {
 public:
  Query() = default;
  /// Drops repeated tokens, keeping the first occurrence.
  Query(std::string id, std::span<const std::string> tokens);

  static Query parse(std::string id, std::string_view text, const AnalyzerConfig& config);

  const std::string& id() const noexcept { return id_; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  bool contains(std::string_view term) const;

  /// Adds `term` at the end unless already present. Returns whether it was added.
  bool append(std::string term);

  bool operator==(const Query&) const = default;

 private:
  std::string id_;
  std::vector<std::string> terms_;
};

struct ScoredDoc {
  DocId doc_id = 0;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Sorted by descending score, ties by ascending doc id.
struct RankedList {
  std::vector<ScoredDoc> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  bool operator==(const RankedList&) const = default;
};

/// 1 + ln(N / (df + 1)); df is 0 for terms outside the dictionary.
double idf(const InvertedIndex& index, std::string_view term);
double idf_from_counts(std::size_t doc_count, std::size_t doc_freq);

/// coord(q, d) * sum over shared terms of sqrt(tf) * idf^2 / sqrt(|d|), with
/// coord = |q ∩ d| / |q|. Throws std::out_of_range on an unknown doc id.
double score(const InvertedIndex& index, const Query& query, DocId doc);

/// Every document with a positive score, best first, cut to `k`.
/// An empty query yields an empty list. Throws std::invalid_argument if k == 0.
RankedList search(const InvertedIndex& index, const Query& query, std::size_t k);

/// TREC run lines: `qid Q0 external_id rank score tag`, ranks from 1.
void write_trec_run(std::ostream& out, const InvertedIndex& index, std::string_view qid,
                    const RankedList& ranked, std::string_view tag);

/// External ids of the ranked documents, in rank order.
std::vector<std::string> external_ids(const InvertedIndex& index, const RankedList& ranked);

}  // namespace assocprf
