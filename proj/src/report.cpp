#include "assocprf/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include "assocprf/csv.hpp"
#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"

namespace assocprf {
namespace {

std::string format(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

// "37.75", "0.5", "4": two decimals with trailing zeros dropped.
std::string percent(std::size_t part, std::size_t whole) {
  std::string s = format("%.2f", whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) /
                                                        static_cast<double>(whole));
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s + "%";
}

std::string join_values(const std::vector<std::size_t>& values, const char* separator) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += separator;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<MeanImprovedRow> mean_improved(std::span<const RunResult> results, bool by_d) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> sums;  // value -> (sum, cells)
  for (const auto& r : results) {
    auto& [sum, cells] = sums[by_d ? r.feedback_docs : r.expansion_terms];
    sum += r.aggregates().improved;
    ++cells;
  }
  std::vector<MeanImprovedRow> rows;
  for (const auto& [value, acc] : sums)
    rows.push_back({value, static_cast<double>(acc.first) / static_cast<double>(acc.second)});
  return rows;
}

char p5_direction(const LeaderboardRow& row) {
  if (row.p5_after > row.p5_before) return '+';
  if (row.p5_after < row.p5_before) return '-';
  return '=';
}

}  // namespace

SweepReport aggregate(std::span<const RunResult> results) {
  if (results.empty()) throw Error("no sweep cells to aggregate");
  std::vector<const RunResult*> cells;
  for (const auto& r : results) cells.push_back(&r);
  std::sort(cells.begin(), cells.end(), [](const RunResult* a, const RunResult* b) {
    return std::tie(a->feedback_docs, a->expansion_terms) < std::tie(b->feedback_docs, b->expansion_terms);
  });

  std::vector<std::string> qids;
  for (const auto& q : cells.front()->queries) qids.push_back(q.qid);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const RunResult* cell : cells) {
    if (!seen.insert({cell->feedback_docs, cell->expansion_terms}).second)
      throw Error("duplicate cell D=" + std::to_string(cell->feedback_docs) +
                  " T=" + std::to_string(cell->expansion_terms));
    bool same = cell->queries.size() == qids.size();
    for (std::size_t i = 0; same && i < qids.size(); ++i) same = cell->queries[i].qid == qids[i];
    if (!same)
      throw Error("inconsistent query sets across cells (D=" + std::to_string(cell->feedback_docs) +
                  " T=" + std::to_string(cell->expansion_terms) + ")");
  }

  SweepReport report;
  report.cell_count = cells.size();
  report.query_count = qids.size();
  report.judged_queries = cells.front()->aggregates().judged;
  report.by_feedback_docs = mean_improved(results, true);
  report.by_expansion_terms = mean_improved(results, false);

  std::map<std::size_t, std::pair<std::set<std::size_t>, std::set<std::size_t>>> buckets;
  std::map<std::size_t, std::size_t> bucket_cells;
  for (auto& qid : qids) report.per_query.push_back({qid, 0, 0, 0});
  for (const RunResult* cell : cells) {
    const RunAggregates agg = cell->aggregates();
    auto& [ds, ts] = buckets[agg.improved];
    ds.insert(cell->feedback_docs);
    ts.insert(cell->expansion_terms);
    ++bucket_cells[agg.improved];
    for (std::size_t i = 0; i < qids.size(); ++i) {
      switch (cell->queries[i].outcome) {
        case Outcome::kImproved: ++report.per_query[i].improved; break;
        case Outcome::kNotImproved: ++report.per_query[i].not_improved; break;
        case Outcome::kNoDecision: ++report.per_query[i].no_decision; break;
      }
    }
    report.leaderboard.push_back(
        {cell->feedback_docs, cell->expansion_terms, agg.p_after[0], agg.p_before[0]});
  }
  for (const auto& [improved, values] : buckets) {
    report.improvement_buckets.push_back(
        {improved, bucket_cells[improved], {values.first.begin(), values.first.end()},
         {values.second.begin(), values.second.end()}});
  }
  std::sort(report.leaderboard.begin(), report.leaderboard.end(),
            [](const LeaderboardRow& a, const LeaderboardRow& b) {
              if (a.p5_after != b.p5_after) return a.p5_after > b.p5_after;
              return std::tie(a.feedback_docs, a.expansion_terms) <
                     std::tie(b.feedback_docs, b.expansion_terms);
            });
  for (const auto& row : report.leaderboard) {
    switch (p5_direction(row)) {
      case '+': ++report.p5_improved_cells; break;
      case '-': ++report.p5_worsened_cells; break;
      default: ++report.p5_tied_cells; break;
    }
  }
  return report;
}

std::vector<RunResult> load_sweep(const std::filesystem::path& sweep_dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(sweep_dir / kManifestName))
    throw Error("no " + std::string(kManifestName) + " in " + sweep_dir.string());
  std::vector<RunResult> results;
  for (const auto& entry : read_manifest(sweep_dir)) {
    const std::string cell = "D=" + std::to_string(entry.feedback_docs) +
                             " T=" + std::to_string(entry.expansion_terms);
    if (!entry.ok()) throw Error("cell " + cell + " failed during the sweep: " + entry.message);
    const fs::path file = sweep_dir / entry.file;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec))
      throw Error("missing run file for cell " + cell + ": " + entry.file);
    const std::string text = read_file_text(file);
    if (crc32_hex(crc32(text)) != entry.crc32)
      throw Error("checksum mismatch for cell " + cell + ": " + entry.file);
    RunResult result = parse_run_csv(text, entry.feedback_docs, entry.expansion_terms, file.string());
    const RunAggregates agg = result.aggregates();
    if (agg.improved != entry.aggregates.improved || agg.not_improved != entry.aggregates.not_improved ||
        agg.no_decision != entry.aggregates.no_decision || agg.queries != entry.aggregates.queries)
      throw Error("manifest counts disagree with run file for cell " + cell);
    results.push_back(std::move(result));
  }
  if (results.empty()) throw Error("sweep manifest lists no cells: " + sweep_dir.string());
  return results;
}

std::map<std::string, std::string> render_csv(const SweepReport& report) {
  std::map<std::string, std::string> files;

  std::string t3a = "D,mean_improved\n";
  for (const auto& row : report.by_feedback_docs)
    t3a += std::to_string(row.parameter) + "," + csv::fixed6(row.mean_improved) + "\n";
  files["table3a.csv"] = t3a;

  std::string t3b = "T,mean_improved\n";
  for (const auto& row : report.by_expansion_terms)
    t3b += std::to_string(row.parameter) + "," + csv::fixed6(row.mean_improved) + "\n";
  files["table3b.csv"] = t3b;

  std::string t4 = "improved_queries,improved_pct,cells,cells_pct,d_values,t_values\n";
  for (const auto& b : report.improvement_buckets) {
    t4 += csv::join({std::to_string(b.improved_queries), percent(b.improved_queries, report.query_count),
                     std::to_string(b.cells), percent(b.cells, report.cell_count),
                     join_values(b.d_values, " "), join_values(b.t_values, " ")});
    t4 += '\n';
  }
  files["table4.csv"] = t4;

  std::string t5 = "qid,plus,minus,x\n";
  for (const auto& q : report.per_query) {
    t5 += csv::join({q.qid, std::to_string(q.improved), std::to_string(q.not_improved),
                     std::to_string(q.no_decision)});
    t5 += '\n';
  }
  files["table5.csv"] = t5;

  std::string t6 = "rank,D,T,p5_after,p5_before,p5_change\n";
  std::size_t rank = 1;
  for (const auto& row : report.leaderboard) {
    t6 += std::to_string(rank++) + "," + std::to_string(row.feedback_docs) + "," +
          std::to_string(row.expansion_terms) + "," + csv::fixed6(row.p5_after) + "," +
          csv::fixed6(row.p5_before) + "," + std::string(1, p5_direction(row)) + "\n";
  }
  files["table6.csv"] = t6;
  return files;
}

std::string render_markdown(const SweepReport& report) {
  std::string md = "# Sweep report\n\n";
  md += "- cells: " + std::to_string(report.cell_count) + "\n";
  md += "- queries: " + std::to_string(report.query_count) + " (" +
        std::to_string(report.judged_queries) + " with relevance judgments)\n";
  std::size_t ever_improved = 0;
  std::size_t always_undecided = 0;
  for (const auto& q : report.per_query) {
    if (q.improved > 0) ++ever_improved;
    if (q.no_decision == report.cell_count) ++always_undecided;
  }
  md += "- queries improved (+) in at least one cell: " + std::to_string(ever_improved) + " (" +
        percent(ever_improved, report.query_count) + ")\n";
  md += "- queries undecided (X) in every cell: " + std::to_string(always_undecided) + " (" +
        percent(always_undecided, report.query_count) + ")\n";
  md += "- cells where mean P@5 after > before: " + std::to_string(report.p5_improved_cells) + " (" +
        percent(report.p5_improved_cells, report.cell_count) + "); after < before: " +
        std::to_string(report.p5_worsened_cells) + " (" +
        percent(report.p5_worsened_cells, report.cell_count) + "); ties: " +
        std::to_string(report.p5_tied_cells) + " (" + percent(report.p5_tied_cells, report.cell_count) +
        ")\n\n";

  md += "## Table 3a: average number of improved queries by D\n\n";
  md += "| D | Average number of queries (+) |\n|---|---|\n";
  for (const auto& row : report.by_feedback_docs)
    md += "| " + std::to_string(row.parameter) + " | " + format("%.2f", row.mean_improved) + " |\n";

  md += "\n## Table 3b: average number of improved queries by T\n\n";
  md += "| T | Average number of queries (+) |\n|---|---|\n";
  for (const auto& row : report.by_expansion_terms)
    md += "| " + std::to_string(row.parameter) + " | " + format("%.2f", row.mean_improved) + " |\n";

  md += "\n## Table 4: cells by number of improved queries\n\n";
  md += "| Number of queries (+) | Number of tests | D | T |\n|---|---|---|---|\n";
  for (const auto& b : report.improvement_buckets) {
    md += "| " + std::to_string(b.improved_queries) + " (" +
          percent(b.improved_queries, report.query_count) + ") | " + std::to_string(b.cells) + " (" +
          percent(b.cells, report.cell_count) + ") | " + join_values(b.d_values, ", ") + " | " +
          join_values(b.t_values, ", ") + " |\n";
  }

  md += "\n## Table 5: cells per query outcome\n\n";
  md += "| Query | (+) | (-) | (X) |\n|---|---|---|---|\n";
  for (const auto& q : report.per_query) {
    md += "| " + q.qid + " | " + std::to_string(q.improved) + " | " + std::to_string(q.not_improved) +
          " | " + std::to_string(q.no_decision) + " |\n";
  }

  md += "\n## Table 6: best mean P@5 after expansion\n\n";
  md += "| D | T | P@5 |\n|---|---|---|\n";
  const std::size_t shown = std::min<std::size_t>(8, report.leaderboard.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& row = report.leaderboard[i];
    md += "| " + std::to_string(row.feedback_docs) + " | " + std::to_string(row.expansion_terms) +
          " | " + format("%.3f", row.p5_after) + " |\n";
  }
  return md;
}

std::vector<std::filesystem::path> write_report(const SweepReport& report,
                                                const std::filesystem::path& out_dir,
                                                ReportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  if (format != ReportFormat::kMarkdown) {
    for (const auto& [name, content] : render_csv(report)) {
      write_file_atomic(out_dir / name, content);
      written.push_back(out_dir / name);
    }
  }
  if (format != ReportFormat::kCsv) {
    write_file_atomic(out_dir / "report.md", render_markdown(report));
    written.push_back(out_dir / "report.md");
  }
  return written;
}

}  // namespace assocprf
