#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"
#include "assocprf/report.hpp"
#include "oracles.hpp"

using namespace assocprf;
namespace fs = std::filesystem;

namespace {

// One cell; outcome symbols per query, P@5 before/after shared by all queries.
RunResult cell(std::size_t d, std::size_t t, const std::string& outcomes, double p5_before = 0.2,
               double p5_after = 0.2) {
  RunResult r;
  r.feedback_docs = d;
  r.expansion_terms = t;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    QueryResult q;
    q.qid = "q" + std::to_string(i + 1);
    q.outcome = outcome_from_symbol(std::string(1, outcomes[i]));
    q.before.relevant_total = q.after.relevant_total = 1;
    q.before.p_at[0] = p5_before;
    q.after.p_at[0] = p5_after;
    q.before.average_precision = q.after.average_precision = 0.0;
    r.queries.push_back(std::move(q));
  }
  return r;
}

std::vector<RunResult> random_sweep(std::mt19937_64& rng, std::size_t dmax, std::size_t tmax, std::size_t queries) {
  std::vector<RunResult> cells;
  for (std::size_t d = 1; d <= dmax; ++d) {
    for (std::size_t t = 1; t <= tmax; ++t) {
      std::string outcomes;
      for (std::size_t q = 0; q < queries; ++q) outcomes += "+-X"[rng() % 3];
      cells.push_back(cell(d, t, outcomes, (rng() % 6) / 5.0, (rng() % 6) / 5.0));
    }
  }
  std::shuffle(cells.begin(), cells.end(), rng);
  return cells;
}

}  // namespace

TEST(Aggregate, SingleCellThreeQueries) {
  const std::vector<RunResult> cells{cell(1, 1, "+-X")};
  const auto report = aggregate(cells);
  ASSERT_EQ(report.per_query.size(), 3u);
  EXPECT_EQ(report.per_query[0].improved, 1u);
  EXPECT_EQ(report.per_query[0].not_improved + report.per_query[0].no_decision, 0u);
  EXPECT_EQ(report.per_query[1].not_improved, 1u);
  EXPECT_EQ(report.per_query[2].no_decision, 1u);
  ASSERT_EQ(report.by_feedback_docs.size(), 1u);
  EXPECT_EQ(report.by_feedback_docs[0].mean_improved, 1.0);
  ASSERT_EQ(report.improvement_buckets.size(), 1u);
  EXPECT_EQ(report.improvement_buckets[0].improved_queries, 1u);
  EXPECT_EQ(report.leaderboard.size(), 1u);
}

TEST(Aggregate, MeansAndBuckets) {
  const std::vector<RunResult> cells{cell(1, 1, "++X"), cell(1, 2, "XXX"), cell(2, 1, "+XX"), cell(2, 2, "+-+")};
  const auto report = aggregate(cells);
  ASSERT_EQ(report.by_feedback_docs.size(), 2u);
  EXPECT_EQ(report.by_feedback_docs[0].mean_improved, 1.0);  // (2 + 0) / 2
  EXPECT_EQ(report.by_feedback_docs[1].mean_improved, 1.5);  // (1 + 2) / 2
  EXPECT_EQ(report.by_expansion_terms[0].mean_improved, 1.5);
  EXPECT_EQ(report.by_expansion_terms[1].mean_improved, 1.0);
  // buckets: 0 -> {(1,2)}, 1 -> {(2,1)}, 2 -> {(1,1), (2,2)}
  ASSERT_EQ(report.improvement_buckets.size(), 3u);
  EXPECT_EQ(report.improvement_buckets[2].improved_queries, 2u);
  EXPECT_EQ(report.improvement_buckets[2].cells, 2u);
  EXPECT_EQ(report.improvement_buckets[2].d_values, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(report.improvement_buckets[2].t_values, (std::vector<std::size_t>{1, 2}));
}

TEST(Aggregate, LeaderboardOrderIsTotal) {
  const std::vector<RunResult> cells{cell(2, 2, "+", 0.2, 0.4), cell(1, 3, "+", 0.2, 0.4), cell(1, 2, "+", 0.2, 0.4),
                                     cell(3, 1, "+", 0.6, 0.8), cell(1, 1, "+", 0.4, 0.2)};
  const auto report = aggregate(cells);
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (const auto& row : report.leaderboard) order.emplace_back(row.feedback_docs, row.expansion_terms);
  EXPECT_EQ(order, (std::vector<std::pair<std::size_t, std::size_t>>{{3, 1}, {1, 2}, {1, 3}, {2, 2}, {1, 1}}));
  EXPECT_EQ(report.p5_improved_cells, 4u);
  EXPECT_EQ(report.p5_worsened_cells, 1u);
  EXPECT_EQ(report.p5_tied_cells, 0u);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate(std::vector<RunResult>{}), Error);
  EXPECT_THROW(aggregate(std::vector<RunResult>{cell(1, 1, "+"), cell(1, 1, "-")}), Error);
  EXPECT_THROW(aggregate(std::vector<RunResult>{cell(1, 1, "+"), cell(1, 2, "+-")}), Error);
  auto renamed = cell(1, 2, "+");
  renamed.queries[0].qid = "other";
  EXPECT_THROW(aggregate(std::vector<RunResult>{cell(1, 1, "+"), renamed}), Error);
}

TEST(AggregateProperty, RowAndColumnSums) {
  std::mt19937_64 rng(55);
  for (int round = 0; round < 50; ++round) {
    const std::size_t dmax = 1 + rng() % 6, tmax = 1 + rng() % 6, queries = 1 + rng() % 8;
    const auto cells = random_sweep(rng, dmax, tmax, queries);
    const auto report = aggregate(cells);
    EXPECT_EQ(report.cell_count, cells.size());

    std::size_t plus_cells = 0;
    for (const auto& c : cells) plus_cells += c.aggregates().improved;
    std::size_t plus_queries = 0;
    for (const auto& q : report.per_query) {
      EXPECT_EQ(q.improved + q.not_improved + q.no_decision, cells.size());
      plus_queries += q.improved;
    }
    EXPECT_EQ(plus_queries, plus_cells);

    std::size_t bucket_cells = 0;
    for (const auto& b : report.improvement_buckets) bucket_cells += b.cells;
    EXPECT_EQ(bucket_cells, cells.size());

    double mean_d = 0, mean_t = 0;
    for (const auto& r : report.by_feedback_docs) mean_d += r.mean_improved * static_cast<double>(tmax);
    for (const auto& r : report.by_expansion_terms) mean_t += r.mean_improved * static_cast<double>(dmax);
    EXPECT_NEAR(mean_d, static_cast<double>(plus_cells), 1e-9);
    EXPECT_NEAR(mean_t, static_cast<double>(plus_cells), 1e-9);
    EXPECT_EQ(report.by_feedback_docs.size(), dmax);
    EXPECT_EQ(report.by_expansion_terms.size(), tmax);

    EXPECT_EQ(report.leaderboard.size(), cells.size());
    for (std::size_t i = 1; i < report.leaderboard.size(); ++i) {
      const auto& a = report.leaderboard[i - 1];
      const auto& b = report.leaderboard[i];
      EXPECT_TRUE(a.p5_after > b.p5_after ||
                  (a.p5_after == b.p5_after && std::tie(a.feedback_docs, a.expansion_terms) <
                                                   std::tie(b.feedback_docs, b.expansion_terms)));
    }
    EXPECT_EQ(report.p5_improved_cells + report.p5_worsened_cells + report.p5_tied_cells, cells.size());

    // Input order does not matter.
    auto shuffled = cells;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(render_csv(aggregate(shuffled)), render_csv(report));
    EXPECT_EQ(render_markdown(aggregate(shuffled)), render_markdown(report));
  }
}

TEST(Render, CsvSchemas) {
  const std::vector<RunResult> cells{cell(1, 1, "+-X"), cell(1, 2, "XX+", 0.2, 0.4)};
  const auto files = render_csv(aggregate(cells));
  ASSERT_EQ(files.size(), 5u);
  auto header = [&](const std::string& name) {
    const auto& text = files.at(name);
    return text.substr(0, text.find('\n'));
  };
  EXPECT_EQ(header("table3a.csv"), "D,mean_improved");
  EXPECT_EQ(header("table3b.csv"), "T,mean_improved");
  EXPECT_EQ(header("table4.csv"), "improved_queries,improved_pct,cells,cells_pct,d_values,t_values");
  EXPECT_EQ(header("table5.csv"), "qid,plus,minus,x");
  EXPECT_EQ(header("table6.csv"), "rank,D,T,p5_after,p5_before,p5_change");
  EXPECT_EQ(files.at("table5.csv"), "qid,plus,minus,x\nq1,1,0,1\nq2,0,1,1\nq3,1,0,1\n");
  EXPECT_EQ(files.at("table6.csv"),
            "rank,D,T,p5_after,p5_before,p5_change\n1,1,2,0.400000,0.200000,+\n2,1,1,0.200000,0.200000,=\n");
}

TEST(Render, MarkdownHasEveryTable) {
  const std::vector<RunResult> cells{cell(3, 3, "+-X", 0.5, 0.66)};
  const auto md = render_markdown(aggregate(cells));
  for (const char* heading : {"Table 3a", "Table 3b", "Table 4", "Table 5", "Table 6"})
    EXPECT_NE(md.find(heading), std::string::npos) << heading;
  EXPECT_NE(md.find("| 3 | 3 | 0.660 |"), std::string::npos);
  EXPECT_NE(md.find("ties: 0"), std::string::npos);
}

TEST(WriteReport, FormatsAndDeterminism) {
  oracle::TempDir dir;
  const std::vector<RunResult> cells{cell(1, 1, "+-X"), cell(2, 1, "++X")};
  const auto report = aggregate(cells);
  EXPECT_EQ(write_report(report, dir / "csv", ReportFormat::kCsv).size(), 5u);
  EXPECT_EQ(write_report(report, dir / "md", ReportFormat::kMarkdown).size(), 1u);
  const auto both = write_report(report, dir / "both", ReportFormat::kBoth);
  ASSERT_EQ(both.size(), 6u);
  EXPECT_EQ(both.back().filename(), "report.md");
  const auto first = read_file_text(dir / "both/table4.csv");
  write_report(report, dir / "both", ReportFormat::kBoth);
  EXPECT_EQ(read_file_text(dir / "both/table4.csv"), first);
}

namespace {

void write_sweep(const fs::path& dir, const std::vector<RunResult>& cells) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const auto& c : cells) {
    ManifestEntry e;
    e.feedback_docs = c.feedback_docs;
    e.expansion_terms = c.expansion_terms;
    e.file = run_file_name(c.feedback_docs, c.expansion_terms);
    e.status = "ok";
    const std::string text = format_run_csv(c);
    write_file_atomic(dir / e.file, text);
    e.crc32 = crc32_hex(crc32(text));
    e.aggregates = c.aggregates();
    entries.push_back(e);
  }
  write_file_atomic(dir / std::string(kManifestName), format_manifest(entries));
}

std::string error_of(const fs::path& dir) {
  try {
    load_sweep(dir);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadSweep, RoundTrip) {
  oracle::TempDir dir;
  const std::vector<RunResult> cells{cell(1, 1, "+-X"), cell(1, 2, "XX+", 0.2, 0.4)};
  write_sweep(dir / "s", cells);
  const auto loaded = load_sweep(dir / "s");
  EXPECT_EQ(render_csv(aggregate(loaded)), render_csv(aggregate(cells)));
}

TEST(LoadSweep, MissingCellFileNamesTheCell) {
  oracle::TempDir dir;
  write_sweep(dir / "s", {cell(1, 1, "+"), cell(4, 7, "-")});
  fs::remove(dir / "s" / run_file_name(4, 7));
  const auto message = error_of(dir / "s");
  EXPECT_NE(message.find("D=4 T=7"), std::string::npos) << message;
}

TEST(LoadSweep, ChecksumMismatch) {
  oracle::TempDir dir;
  write_sweep(dir / "s", {cell(1, 1, "+"), cell(2, 2, "-")});
  std::ofstream(dir / "s" / run_file_name(2, 2), std::ios::app) << "\n";
  EXPECT_NE(error_of(dir / "s").find("D=2 T=2"), std::string::npos);
}

TEST(LoadSweep, MissingManifest) {
  oracle::TempDir dir;
  EXPECT_FALSE(error_of(dir.path()).empty());
}
