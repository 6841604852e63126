#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "assocprf/index.hpp"
#include "assocprf/retrieval.hpp"

namespace assocprf {

inline constexpr std::size_t kDefaultParamUpperBound = 20;

/// D = documents sampled as pseudo-relevant, T = expansion terms per query term.
struct PrfParams {
  std::size_t feedback_docs = 1;
  std::size_t expansion_terms = 1;

  /// Throws std::invalid_argument unless both lie in [1, upper].
  void validate(std::size_t upper = kDefaultParamUpperBound) const;
};

struct FeedbackSet {
  std::vector<DocId> doc_ids;  // rank order

  bool empty() const noexcept { return doc_ids.empty(); }
  std::size_t size() const noexcept { return doc_ids.size(); }
};

/// First min(D, |ranked|) documents of the ranking.
FeedbackSet sample_top(const RankedList& ranked, std::size_t feedback_docs);

struct Association {
  TermId term = 0;
  std::uint64_t score = 0;

  bool operator==(const Association&) const = default;
};

/// Term-term association scores over a feedback set:
///
///   S(u, v) = sum over d in D_F of tf(u, d) * tf(v, d)
///
/// Raw integer products, no normalization. Only positive cells are stored.
/// A matrix may hold every row of its vocabulary or just the rows that were
/// asked for; missing cells of a materialized row are zero.
class AssociationMatrix {
 public:
  /// Distinct terms of the feedback documents, ascending.
  std::span<const TermId> vocabulary() const noexcept { return vocabulary_; }
  bool in_vocabulary(TermId term) const;

  /// Rows that were computed, ascending.
  std::span<const TermId> rows() const noexcept { return row_terms_; }
  bool has_row(TermId u) const;
  bool complete() const noexcept { return row_terms_.size() == vocabulary_.size(); }

  /// Positive cells of row u sorted by column term; empty when u is not a
  /// materialized row.
  std::span<const Association> row(TermId u) const;

  /// S(u, v). Uses row v when row u was not computed. Throws std::logic_error
  /// when neither row is available.
  std::uint64_t at(TermId u, TermId v) const;

  std::size_t stored_cells() const noexcept { return cells_.size(); }

  bool operator==(const AssociationMatrix&) const = default;

 private:
  friend AssociationMatrix association_rows(const InvertedIndex&, const FeedbackSet&,
                                            std::span<const TermId>);

  std::vector<TermId> vocabulary_;
  std::vector<TermId> row_terms_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<Association> cells_;
};

/// Full matrix over the feedback vocabulary. Throws NoExpansionError when the
/// feedback set is empty.
AssociationMatrix association_matrix(const InvertedIndex& index, const FeedbackSet& feedback);

/// Only the requested rows (a query's terms); rows for terms absent from the
/// feedback documents are skipped. Clusters drawn from it match the full matrix.
AssociationMatrix association_rows(const InvertedIndex& index, const FeedbackSet& feedback,
                                   std::span<const TermId> rows);

/// Up to T columns v != u with S(u, v) > 0, by descending score, ties by
/// ascending term. Empty when u is not in the vocabulary.
std::vector<Association> cluster_terms(const AssociationMatrix& matrix, TermId u,
                                       std::size_t expansion_terms);
std::vector<std::string> cluster_terms(const InvertedIndex& index, const AssociationMatrix& matrix,
                                       std::string_view u, std::size_t expansion_terms);

struct TermCluster {
  std::string source;
  std::vector<std::pair<std::string, std::uint64_t>> members;  // cluster order
};

struct Expansion {
  Query query;                        // q_new
  std::vector<TermCluster> clusters;  // one per original term, query order
  std::vector<std::string> added;     // terms appended to the original query
  std::vector<DocId> feedback;        // D_F in rank order
  bool feedback_empty = false;        // nothing to sample; query left unexpanded
};

/// q_new = q followed by each term's cluster in query order then cluster
/// rank, skipping terms already present.
Expansion expand_query(const InvertedIndex& index, const Query& query,
                       const AssociationMatrix& matrix, std::size_t expansion_terms);

/// Sampling, evidence extraction and rewriting in one call, computing only the
/// matrix rows the query needs. The query passes through unchanged when the
/// initial ranking is empty.
Expansion pseudo_relevance_feedback(const InvertedIndex& index, const Query& query,
                                    const RankedList& initial, const PrfParams& params);

/// Dictionary ids of the query terms that exist in the index, query order.
std::vector<TermId> known_term_ids(const InvertedIndex& index, const Query& query);

/// Expansion trace CSV, one record per query:
///   qid,D,T,original_terms,feedback_docs,clusters,expanded_terms
/// Terms are space separated, feedback external ids '|' separated, clusters
/// `source>term:S term:S;source>...`.
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const InvertedIndex& index, const Query& original,
                     const PrfParams& params, const Expansion& expansion);

}  // namespace assocprf
