#include "assocprf/prf.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "assocprf/csv.hpp"
#include "assocprf/error.hpp"

namespace assocprf {
namespace {

std::vector<DocId> distinct_docs(const FeedbackSet& feedback) {
  std::vector<DocId> docs = feedback.doc_ids;
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
  return docs;
}

std::vector<TermId> feedback_vocabulary(const InvertedIndex& index, std::span<const DocId> docs) {
  std::vector<TermId> vocab;
  for (DocId d : docs) {
    for (const auto& tf : index.document_terms(d)) vocab.push_back(tf.term);
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

// Row u: for each feedback document containing u, add tf(u, d) * tf(v, d) to
// every v of that document. Products are gathered, sorted by v and summed.
void compute_row(const InvertedIndex& index, std::span<const DocId> docs, TermId u,
                 std::vector<Association>& scratch, std::vector<Association>& out) {
  scratch.clear();
  for (DocId d : docs) {
    const std::uint64_t tf_u = index.term_freq(u, d);
    if (tf_u == 0) continue;
    for (const auto& tf : index.document_terms(d)) scratch.push_back({tf.term, tf_u * tf.freq});
  }
  std::sort(scratch.begin(), scratch.end(),
            [](const Association& a, const Association& b) { return a.term < b.term; });
  const std::size_t row_start = out.size();
  for (const auto& cell : scratch) {
    if (out.size() > row_start && out.back().term == cell.term) {
      out.back().score += cell.score;
    } else {
      out.push_back(cell);
    }
  }
}

bool stronger(const Association& a, const Association& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.term < b.term;
}

std::string join_terms(const std::vector<std::string>& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += ' ';
    out += terms[i];
  }
  return out;
}

}  // namespace

void PrfParams::validate(std::size_t upper) const {
  if (feedback_docs < 1 || feedback_docs > upper)
    throw std::invalid_argument("D must be in [1, " + std::to_string(upper) + "], got " +
                                std::to_string(feedback_docs));
  if (expansion_terms < 1 || expansion_terms > upper)
    throw std::invalid_argument("T must be in [1, " + std::to_string(upper) + "], got " +
                                std::to_string(expansion_terms));
}

FeedbackSet sample_top(const RankedList& ranked, std::size_t feedback_docs) {
  FeedbackSet feedback;
  const std::size_t n = std::min(feedback_docs, ranked.size());
  feedback.doc_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) feedback.doc_ids.push_back(ranked.entries[i].doc_id);
  return feedback;
}

bool AssociationMatrix::in_vocabulary(TermId term) const {
  return std::binary_search(vocabulary_.begin(), vocabulary_.end(), term);
}

bool AssociationMatrix::has_row(TermId u) const {
  return std::binary_search(row_terms_.begin(), row_terms_.end(), u);
}

std::span<const Association> AssociationMatrix::row(TermId u) const {
  auto it = std::lower_bound(row_terms_.begin(), row_terms_.end(), u);
  if (it == row_terms_.end() || *it != u) return {};
  const auto r = static_cast<std::size_t>(it - row_terms_.begin());
  return std::span(cells_).subspan(row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]);
}

std::uint64_t AssociationMatrix::at(TermId u, TermId v) const {
  TermId r = u;
  TermId c = v;
  if (!has_row(u)) {
    if (!has_row(v)) {
      if (!in_vocabulary(u) || !in_vocabulary(v)) return 0;
      throw std::logic_error("association row not materialized");
    }
    std::swap(r, c);
  }
  auto cells = row(r);
  auto it = std::lower_bound(cells.begin(), cells.end(), c,
                             [](const Association& a, TermId t) { return a.term < t; });
  return it != cells.end() && it->term == c ? it->score : 0;
}

AssociationMatrix association_rows(const InvertedIndex& index, const FeedbackSet& feedback,
                                   std::span<const TermId> rows) {
  if (feedback.empty()) throw NoExpansionError("empty feedback set: no expansion possible");
  const std::vector<DocId> docs = distinct_docs(feedback);

  AssociationMatrix matrix;
  matrix.vocabulary_ = feedback_vocabulary(index, docs);
  std::vector<TermId> wanted(rows.begin(), rows.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

  std::vector<Association> scratch;
  for (TermId u : wanted) {
    if (!matrix.in_vocabulary(u)) continue;
    compute_row(index, docs, u, scratch, matrix.cells_);
    matrix.row_terms_.push_back(u);
    matrix.row_offsets_.push_back(matrix.cells_.size());
  }
  return matrix;
}

AssociationMatrix association_matrix(const InvertedIndex& index, const FeedbackSet& feedback) {
  if (feedback.empty()) throw NoExpansionError("empty feedback set: no expansion possible");
  const std::vector<TermId> vocab = feedback_vocabulary(index, distinct_docs(feedback));
  return association_rows(index, feedback, vocab);
}

std::vector<Association> cluster_terms(const AssociationMatrix& matrix, TermId u,
                                       std::size_t expansion_terms) {
  if (expansion_terms == 0) throw std::invalid_argument("T must be >= 1");
  if (!matrix.in_vocabulary(u)) return {};
  if (!matrix.has_row(u)) throw std::logic_error("association row not materialized");
  std::vector<Association> candidates;
  for (const auto& cell : matrix.row(u)) {
    if (cell.term != u && cell.score > 0) candidates.push_back(cell);
  }
  const std::size_t n = std::min(expansion_terms, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), stronger);
  candidates.resize(n);
  return candidates;
}

std::vector<std::string> cluster_terms(const InvertedIndex& index, const AssociationMatrix& matrix,
                                       std::string_view u, std::size_t expansion_terms) {
  std::vector<std::string> out;
  auto id = index.find(u);
  if (!id) return out;
  for (const auto& cell : cluster_terms(matrix, *id, expansion_terms))
    out.push_back(index.term(cell.term));
  return out;
}

std::vector<TermId> known_term_ids(const InvertedIndex& index, const Query& query) {
  std::vector<TermId> ids;
  for (const auto& term : query.terms()) {
    if (auto id = index.find(term)) ids.push_back(*id);
  }
  return ids;
}

Expansion expand_query(const InvertedIndex& index, const Query& query,
                       const AssociationMatrix& matrix, std::size_t expansion_terms) {
  Expansion expansion;
  expansion.query = query;
  for (const auto& term : query.terms()) {
    TermCluster cluster{term, {}};
    if (auto id = index.find(term)) {
      for (const auto& cell : cluster_terms(matrix, *id, expansion_terms))
        cluster.members.emplace_back(index.term(cell.term), cell.score);
    }
    expansion.clusters.push_back(std::move(cluster));
  }
  for (const auto& cluster : expansion.clusters) {
    for (const auto& [member, s] : cluster.members) {
      if (expansion.query.append(member)) expansion.added.push_back(member);
    }
  }
  return expansion;
}

Expansion pseudo_relevance_feedback(const InvertedIndex& index, const Query& query,
                                    const RankedList& initial, const PrfParams& params) {
  const FeedbackSet feedback = sample_top(initial, params.feedback_docs);
  if (feedback.empty()) {
    Expansion expansion;
    expansion.query = query;
    for (const auto& term : query.terms()) expansion.clusters.push_back({term, {}});
    expansion.feedback_empty = true;
    return expansion;
  }
  const AssociationMatrix matrix = association_rows(index, feedback, known_term_ids(index, query));
  Expansion expansion = expand_query(index, query, matrix, params.expansion_terms);
  expansion.feedback = feedback.doc_ids;
  return expansion;
}

void write_trace_header(std::ostream& out) {
  out << "qid,D,T,original_terms,feedback_docs,clusters,expanded_terms\n";
}

void write_trace_row(std::ostream& out, const InvertedIndex& index, const Query& original,
                     const PrfParams& params, const Expansion& expansion) {
  std::string docs;
  for (std::size_t i = 0; i < expansion.feedback.size(); ++i) {
    if (i > 0) docs += '|';
    docs += index.document(expansion.feedback[i]).external_id;
  }
  std::string clusters;
  for (std::size_t i = 0; i < expansion.clusters.size(); ++i) {
    if (i > 0) clusters += ';';
    clusters += expansion.clusters[i].source + '>';
    for (std::size_t j = 0; j < expansion.clusters[i].members.size(); ++j) {
      if (j > 0) clusters += ' ';
      const auto& [term, s] = expansion.clusters[i].members[j];
      clusters += term + ':' + std::to_string(s);
    }
  }
  out << csv::join({original.id(), std::to_string(params.feedback_docs),
                    std::to_string(params.expansion_terms), join_terms(original.terms()), docs,
                    clusters, join_terms(expansion.query.terms())})
      << '\n';
}

}  // namespace assocprf
