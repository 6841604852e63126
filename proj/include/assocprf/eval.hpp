#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace assocprf {

using RelevantSet = std::set<std::string, std::less<>>;

/// query id -> external ids judged relevant. Queries whose judgments are all
/// zero are kept with an empty set.
class Qrels {
 public:
  bool contains(std::string_view qid) const { return judged_.find(qid) != judged_.end(); }
  /// Empty set for unknown queries.
  const RelevantSet& relevant(std::string_view qid) const;
  void add(std::string qid, std::string external_id, bool relevant);
  std::size_t query_count() const noexcept { return judged_.size(); }
  const std::map<std::string, RelevantSet, std::less<>>& queries() const noexcept { return judged_; }

 private:
  std::map<std::string, RelevantSet, std::less<>> judged_;
};

/// TREC qrels: `qid iter external_id rel` per line, whitespace separated,
/// rel > 0 meaning relevant. Blank lines are skipped. Throws ParseError with
/// the line number on a malformed line.
Qrels parse_qrels(std::istream& in, const std::string& source = "<qrels>");
Qrels parse_qrels(const std::filesystem::path& path);

inline constexpr std::array<std::size_t, 5> kPrecisionCutoffs = {5, 10, 20, 100, 1000};
inline constexpr std::size_t kCurvePoints = 11;
using Curve11 = std::array<double, kCurvePoints>;

/// Relevant documents in the first min(k, |ranking|) positions, over k.
double precision_at_k(std::span<const std::string> ranking, const RelevantSet& relevant,
                      std::size_t k);

/// Sum of precision at each relevant rank, over |relevant|. nullopt when the
/// relevant set is empty.
std::optional<double> average_precision(std::span<const std::string> ranking,
                                        const RelevantSet& relevant);

/// Interpolated precision at recall 0.0, 0.1, ..., 1.0: the best precision
/// reached at any recall >= the level, 0 where that recall is never reached.
/// nullopt when the relevant set is empty.
std::optional<Curve11> interpolated_11pt(std::span<const std::string> ranking,
                                         const RelevantSet& relevant);

struct QueryMetrics {
  std::size_t retrieved = 0;
  std::size_t relevant_retrieved = 0;
  std::size_t relevant_total = 0;
  std::array<double, kPrecisionCutoffs.size()> p_at{};
  std::optional<double> average_precision;
  std::optional<Curve11> curve;

  bool judged() const noexcept { return relevant_total > 0; }
  double precision_at(std::size_t cutoff) const;  // cutoff must be one of kPrecisionCutoffs
  bool operator==(const QueryMetrics&) const = default;
};

QueryMetrics evaluate(std::span<const std::string> ranking, const RelevantSet& relevant);

/// Same metrics from precomputed judgments: judged_relevant[i] is nonzero when
/// the document at rank i + 1 is relevant; relevant_total is |relevant|.
QueryMetrics evaluate_judgments(std::span<const std::uint8_t> judged_relevant,
                                std::size_t relevant_total);

enum class Outcome { kImproved, kNotImproved, kNoDecision };

/// '+', '-' or 'X'.
char outcome_symbol(Outcome outcome);
Outcome outcome_from_symbol(std::string_view symbol);

/// + when `after` is strictly above `before` at all eleven points, - when it
/// is strictly below at all eleven, X otherwise (including equal curves).
Outcome classify(const Curve11& before, const Curve11& after);

/// Header of the per-run metrics CSV:
///   qid,retrieved,rel_ret,p5,p10,p20,p100,p1000,ap,r00,r10,...,r100
std::vector<std::string> metrics_columns();
/// Fields matching metrics_columns() minus qid. Undefined AP and curve
/// points are written as NA.
std::vector<std::string> metrics_fields(const QueryMetrics& metrics);
/// Inverse of metrics_fields; `relevant_total` is not stored and is taken
/// from the caller.
QueryMetrics parse_metrics_fields(std::span<const std::string> fields, std::size_t relevant_total);

/// A TREC run file: qid -> external ids in rank order. Lines are
/// `qid Q0 external_id rank score tag`; rows are ordered by the rank column.
std::map<std::string, std::vector<std::string>> parse_trec_run(std::istream& in,
                                                               const std::string& source = "<run>");

}  // namespace assocprf
