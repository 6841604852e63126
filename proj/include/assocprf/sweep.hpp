#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "assocprf/eval.hpp"
#include "assocprf/index.hpp"
#include "assocprf/prf.hpp"
#include "assocprf/retrieval.hpp"

namespace assocprf {

/// Closed integer interval, written `lo:hi` or a single `n`.
struct IntRange {
  std::size_t lo = 1;
  std::size_t hi = kDefaultParamUpperBound;

  static IntRange parse(std::string_view text);
  std::size_t size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
  bool operator==(const IntRange&) const = default;
};

// Row flags written to run files.
inline constexpr std::string_view kFlagNoRelevant = "no_rel";
inline constexpr std::string_view kFlagEmptyQuery = "empty_query";
inline constexpr std::string_view kFlagNoInitialResults = "no_initial_results";
inline constexpr std::string_view kFlagNotExpanded = "not_expanded";

struct QueryResult {
  std::string qid;
  QueryMetrics before;
  QueryMetrics after;
  Outcome outcome = Outcome::kNoDecision;
  std::vector<std::string> before_terms;
  std::vector<std::string> after_terms;
  std::vector<std::string> before_flags;
  std::vector<std::string> after_flags;

  bool operator==(const QueryResult&) const = default;
};

struct RunAggregates {
  std::size_t queries = 0;
  std::size_t judged = 0;  // queries with at least one relevant document
  std::size_t improved = 0;
  std::size_t not_improved = 0;
  std::size_t no_decision = 0;
  double map_before = 0.0;  // means over judged queries
  double map_after = 0.0;
  std::array<double, kPrecisionCutoffs.size()> p_before{};
  std::array<double, kPrecisionCutoffs.size()> p_after{};
};

struct RunResult {
  std::size_t feedback_docs = 0;    // D
  std::size_t expansion_terms = 0;  // T
  std::vector<QueryResult> queries;

  RunAggregates aggregates() const;
  bool operator==(const RunResult&) const = default;
};

/// The fixed half of the experiment: queries, judgments and the initial
/// (D, T)-independent run, computed once and shared by every cell.
class Experiment {
 public:
  /// Throws Error when a query has no entry in the qrels, or depth == 0.
  Experiment(const InvertedIndex& index, std::vector<Query> queries, const Qrels& qrels,
             std::size_t depth);

  /// One (D, T) cell. Thread-safe; writes one trace row per query when
  /// `trace` is given.
  RunResult run(const PrfParams& params, std::ostream* trace = nullptr) const;

  const InvertedIndex& index() const noexcept { return *index_; }
  std::span<const Query> queries() const noexcept { return queries_; }
  std::size_t depth() const noexcept { return depth_; }

 private:
  struct Baseline {
    RankedList ranking;
    QueryMetrics metrics;
    std::vector<std::string> flags;
  };

  QueryMetrics measure(std::size_t query, const RankedList& ranking) const;

  const InvertedIndex* index_;
  std::vector<Query> queries_;
  std::vector<std::vector<std::uint8_t>> relevant_docs_;  // per query, indexed by doc id
  std::vector<std::size_t> relevant_totals_;
  std::vector<Baseline> baselines_;
  std::size_t depth_;
};

/// Initial run, feedback, expansion, second run and classification for every
/// query at one (D, T).
RunResult run_combination(const InvertedIndex& index, const std::vector<Query>& queries,
                          const Qrels& qrels, std::size_t feedback_docs,
                          std::size_t expansion_terms, std::size_t depth);

/// Run file: header, then for each query a `before` row and an `after` row.
///   qid,stage,relevant,retrieved,rel_ret,p5,p10,p20,p100,p1000,ap,r00..r100,outcome,flags,terms
std::string format_run_csv(const RunResult& result);
RunResult parse_run_csv(std::string_view text, std::size_t feedback_docs,
                        std::size_t expansion_terms, const std::string& source = "<run>");
std::string run_file_name(std::size_t feedback_docs, std::size_t expansion_terms);
std::string trace_file_name(std::size_t feedback_docs, std::size_t expansion_terms);

inline constexpr std::string_view kManifestName = "sweep_manifest.csv";

struct ManifestEntry {
  std::size_t feedback_docs = 0;
  std::size_t expansion_terms = 0;
  std::string file;
  std::string status;  // "ok" or "failed"
  std::string crc32;
  RunAggregates aggregates;
  std::string message;

  bool ok() const noexcept { return status == "ok"; }
};

std::string format_manifest(std::vector<ManifestEntry> entries);
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& source);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

struct SweepConfig {
  IntRange d_range;
  IntRange t_range;
  std::size_t depth = 1000;
  std::filesystem::path index_path;
  std::filesystem::path queries_path;
  std::filesystem::path qrels_path;
  std::filesystem::path out_dir;
  unsigned workers = 1;
  bool resume = false;
  bool write_traces = false;
  std::size_t param_upper_bound = kDefaultParamUpperBound;

  /// Throws std::invalid_argument on empty or out-of-bound ranges, a depth
  /// below the deepest cutoff, or zero workers.
  void validate() const;
};

struct SweepSummary {
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already complete on resume
  std::size_t failed = 0;
  std::vector<ManifestEntry> manifest;
};

using SweepProgress = std::function<void(const ManifestEntry& cell, std::size_t done, std::size_t total)>;

/// Runs every (D, T) cell of the grid across `workers` threads, writing one
/// run file per cell and the manifest. A failing cell is recorded and the
/// others go on.
SweepSummary run_sweep(const SweepConfig& config, const SweepProgress& progress = {});
SweepSummary run_sweep(const SweepConfig& config, const Experiment& experiment,
                       const SweepProgress& progress = {});

}  // namespace assocprf
