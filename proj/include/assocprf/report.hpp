#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "assocprf/sweep.hpp"

namespace assocprf {

struct MeanImprovedRow {
  std::size_t parameter = 0;  // a D value (table 3a) or a T value (table 3b)
  double mean_improved = 0.0;
};

/// Cells grouped by how many queries they improved.
struct ImprovementBucket {
  std::size_t improved_queries = 0;
  std::size_t cells = 0;
  std::vector<std::size_t> d_values;  // distinct, ascending
  std::vector<std::size_t> t_values;
};

struct QueryOutcomeCounts {
  std::string qid;
  std::size_t improved = 0;
  std::size_t not_improved = 0;
  std::size_t no_decision = 0;
};

struct LeaderboardRow {
  std::size_t feedback_docs = 0;
  std::size_t expansion_terms = 0;
  double p5_after = 0.0;
  double p5_before = 0.0;
};

struct SweepReport {
  std::size_t cell_count = 0;
  std::size_t query_count = 0;
  std::size_t judged_queries = 0;
  std::vector<MeanImprovedRow> by_feedback_docs;     // table 3a
  std::vector<MeanImprovedRow> by_expansion_terms;   // table 3b
  std::vector<ImprovementBucket> improvement_buckets;  // table 4
  std::vector<QueryOutcomeCounts> per_query;         // table 5, query order
  std::vector<LeaderboardRow> leaderboard;           // table 6, best first
  // Cells whose mean P@5 went up, down, or stayed put after expansion.
  std::size_t p5_improved_cells = 0;
  std::size_t p5_worsened_cells = 0;
  std::size_t p5_tied_cells = 0;
};

/// Builds every table from the cells. Throws Error when `results` is empty or
/// the cells disagree on the query list.
SweepReport aggregate(std::span<const RunResult> results);

/// Loads every run listed in the sweep manifest, checking status and checksum.
/// Throws Error naming the first missing, failed or corrupt cell.
std::vector<RunResult> load_sweep(const std::filesystem::path& sweep_dir);

/// file name -> CSV content for table3a.csv .. table6.csv.
std::map<std::string, std::string> render_csv(const SweepReport& report);
std::string render_markdown(const SweepReport& report);

enum class ReportFormat { kCsv, kMarkdown, kBoth };

/// Writes the rendered files into `out_dir` (created if needed) and returns
/// their paths in write order.
std::vector<std::filesystem::path> write_report(const SweepReport& report,
                                                const std::filesystem::path& out_dir,
                                                ReportFormat format = ReportFormat::kBoth);

}  // namespace assocprf
