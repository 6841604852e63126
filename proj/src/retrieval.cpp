#include "assocprf/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace assocprf {
namespace {

// Shared by the single-document and batch paths so both round identically.
inline double term_weight(std::uint32_t tf, double term_idf, std::uint32_t doc_length) {
  return std::sqrt(static_cast<double>(tf)) * (term_idf * term_idf) *
         (1.0 / std::sqrt(static_cast<double>(doc_length)));
}

inline double coordinated(std::size_t matched, std::size_t query_size, double sum) {
  return (static_cast<double>(matched) / static_cast<double>(query_size)) * sum;
}

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

}  // namespace

Query::Query(std::string id, std::span<const std::string> tokens) : id_(std::move(id)) {
  for (const auto& token : tokens) append(token);
}

Query Query::parse(std::string id, std::string_view text, const AnalyzerConfig& config) {
  return Query(std::move(id), tokenize(text, config));
}

bool Query::contains(std::string_view term) const {
  return std::find(terms_.begin(), terms_.end(), term) != terms_.end();
}

bool Query::append(std::string term) {
  if (term.empty() || contains(term)) return false;
  terms_.push_back(std::move(term));
  return true;
}

double idf_from_counts(std::size_t doc_count, std::size_t doc_freq) {
  return 1.0 + std::log(static_cast<double>(doc_count) / static_cast<double>(doc_freq + 1));
}

double idf(const InvertedIndex& index, std::string_view term) {
  auto id = index.find(term);
  return idf_from_counts(index.doc_count(), id ? index.doc_freq(*id) : 0);
}

double score(const InvertedIndex& index, const Query& query, DocId doc) {
  const Document& d = index.document(doc);
  if (query.empty()) return 0.0;
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto& term : query.terms()) {
    auto id = index.find(term);
    if (!id) continue;
    const std::uint32_t tf = index.term_freq(*id, doc);
    if (tf == 0) continue;
    sum += term_weight(tf, idf_from_counts(index.doc_count(), index.doc_freq(*id)), d.length);
    ++matched;
  }
  return matched == 0 ? 0.0 : coordinated(matched, query.size(), sum);
}

RankedList search(const InvertedIndex& index, const Query& query, std::size_t k) {
  if (k == 0) throw std::invalid_argument("search depth k must be >= 1");
  RankedList ranked;
  if (query.empty()) return ranked;

  const auto docs = index.documents();
  std::vector<double> sums(docs.size(), 0.0);
  std::vector<std::uint32_t> matched(docs.size(), 0);
  std::vector<DocId> touched;
  // Term-at-a-time in query order: each document sees its contributions in
  // the same order as score() adds them.
  for (const auto& term : query.terms()) {
    auto id = index.find(term);
    if (!id) continue;
    const auto list = index.postings(*id);
    const double term_idf = idf_from_counts(index.doc_count(), list.size());
    for (const auto& p : list) {
      if (matched[p.doc_id]++ == 0) touched.push_back(p.doc_id);
      sums[p.doc_id] += term_weight(p.term_freq, term_idf, docs[p.doc_id].length);
    }
  }

  ranked.entries.reserve(touched.size());
  for (DocId doc : touched) {
    const double s = coordinated(matched[doc], query.size(), sums[doc]);
    if (s > 0.0) ranked.entries.push_back({doc, s});
  }
  if (ranked.entries.size() > k) {
    std::partial_sort(ranked.entries.begin(), ranked.entries.begin() + static_cast<std::ptrdiff_t>(k),
                      ranked.entries.end(), ranks_before);
    ranked.entries.resize(k);
  } else {
    std::sort(ranked.entries.begin(), ranked.entries.end(), ranks_before);
  }
  return ranked;
}

void write_trec_run(std::ostream& out, const InvertedIndex& index, std::string_view qid,
                    const RankedList& ranked, std::string_view tag) {
  char score_buf[64];
  std::size_t rank = 1;
  for (const auto& entry : ranked.entries) {
    std::snprintf(score_buf, sizeof score_buf, "%.6f", entry.score);
    out << qid << " Q0 " << index.document(entry.doc_id).external_id << ' ' << rank++ << ' '
        << score_buf << ' ' << tag << '\n';
  }
}

std::vector<std::string> external_ids(const InvertedIndex& index, const RankedList& ranked) {
  std::vector<std::string> ids;
  ids.reserve(ranked.size());
  for (const auto& entry : ranked.entries) ids.push_back(index.document(entry.doc_id).external_id);
  return ids;
}

}  // namespace assocprf
