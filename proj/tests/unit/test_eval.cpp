#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "assocprf/error.hpp"
#include "assocprf/eval.hpp"
#include "oracles.hpp"

using namespace assocprf;
using Ranking = std::vector<std::string>;

namespace {

Qrels parse(const std::string& text) {
  std::istringstream in(text);
  return parse_qrels(in);
}

Curve11 filled(double v) {
  Curve11 c;
  c.fill(v);
  return c;
}

}  // namespace

TEST(Qrels, Parse) {
  const auto qrels = parse("q1 0 d1 1\nq1 0 d3 1\n");
  EXPECT_EQ(qrels.relevant("q1"), (RelevantSet{"d1", "d3"}));
}

TEST(Qrels, ZeroRelevanceKeepsQueryWithEmptySet) {
  const auto qrels = parse("q1 0 d1 0\n");
  EXPECT_TRUE(qrels.contains("q1"));
  EXPECT_TRUE(qrels.relevant("q1").empty());
  EXPECT_FALSE(qrels.contains("q2"));
}

TEST(Qrels, DuplicatesCollapseAndBlankLinesSkipped) {
  const auto qrels = parse("q1 0 d1 1\n\nq1 0 d1 2\nq2 0 d9 1\n");
  EXPECT_EQ(qrels.relevant("q1").size(), 1u);
  EXPECT_EQ(qrels.query_count(), 2u);
}

TEST(Qrels, WrongArityReportsLine) {
  try {
    parse("q1 d1 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  try {
    parse("q1 0 d1 1\nq1 0 d2 x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Qrels, UnreadableFile) { EXPECT_THROW(parse_qrels(std::filesystem::path("/nonexistent/qrels")), Error); }

TEST(Precision, DenominatorIsK) {
  const RelevantSet rel{"d1", "d3"};
  EXPECT_DOUBLE_EQ(precision_at_k(Ranking{"d1", "d2", "d3"}, rel, 5), 0.4);
  EXPECT_EQ(precision_at_k(Ranking{}, RelevantSet{"d1"}, 5), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(Ranking{"d1", "d2", "d3"}, rel, 1), 1.0);
}

TEST(AveragePrecision, Examples) {
  EXPECT_NEAR(*average_precision(Ranking{"d1", "d2", "d3"}, RelevantSet{"d1", "d3"}), 0.8333, 5e-5);
  EXPECT_DOUBLE_EQ(*average_precision(Ranking{"d1", "d2", "d3"}, RelevantSet{"d1", "d3"}), (1.0 + 2.0 / 3.0) / 2.0);
  EXPECT_EQ(*average_precision(Ranking{"a", "b", "c"}, RelevantSet{"a", "b", "c"}), 1.0);
  EXPECT_EQ(*average_precision(Ranking{"x", "y"}, RelevantSet{"a"}), 0.0);
  EXPECT_FALSE(average_precision(Ranking{"x"}, RelevantSet{}).has_value());
}

TEST(AveragePrecision, UnretrievedRelevantCountInDenominator) {
  EXPECT_DOUBLE_EQ(*average_precision(Ranking{"a"}, RelevantSet{"a", "b"}), 0.5);
}

TEST(Curve, HandEvaluated) {
  const auto c = *interpolated_11pt(Ranking{"d1", "d2", "d3"}, RelevantSet{"d1", "d3"});
  for (std::size_t i = 0; i <= 5; ++i) EXPECT_EQ(c[i], 1.0) << i;
  for (std::size_t i = 6; i <= 10; ++i) EXPECT_EQ(c[i], 2.0 / 3.0) << i;
}

TEST(Curve, PerfectAndEmptyRuns) {
  EXPECT_EQ(*interpolated_11pt(Ranking{"a", "b", "x"}, RelevantSet{"a", "b"}), filled(1.0));
  EXPECT_EQ(*interpolated_11pt(Ranking{"x", "y"}, RelevantSet{"a", "b"}), filled(0.0));
  EXPECT_EQ(*interpolated_11pt(Ranking{}, RelevantSet{"a"}), filled(0.0));
  EXPECT_FALSE(interpolated_11pt(Ranking{"a"}, RelevantSet{}).has_value());
}

TEST(Curve, UnreachedRecallLevelsAreZero) {
  // One of three relevant found at rank 2: recall 1/3 covers levels 0.0..0.3.
  const auto c = *interpolated_11pt(Ranking{"x", "a"}, RelevantSet{"a", "b", "c"});
  for (std::size_t i = 0; i <= 3; ++i) EXPECT_EQ(c[i], 0.5);
  for (std::size_t i = 4; i <= 10; ++i) EXPECT_EQ(c[i], 0.0);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(filled(0.5), filled(0.6)), Outcome::kImproved);
  EXPECT_EQ(classify(filled(0.6), filled(0.5)), Outcome::kNotImproved);
  EXPECT_EQ(classify(filled(0.5), filled(0.5)), Outcome::kNoDecision);
  Curve11 before = filled(0.5), after = filled(0.5);
  after[0] = 0.9;
  after[10] = 0.1;
  EXPECT_EQ(classify(before, after), Outcome::kNoDecision);
  after = filled(0.6);
  after[4] = 0.5;  // a single tie blocks +
  EXPECT_EQ(classify(before, after), Outcome::kNoDecision);
}

TEST(Classify, Symbols) {
  EXPECT_EQ(outcome_symbol(Outcome::kImproved), '+');
  EXPECT_EQ(outcome_symbol(Outcome::kNotImproved), '-');
  EXPECT_EQ(outcome_symbol(Outcome::kNoDecision), 'X');
  for (auto o : {Outcome::kImproved, Outcome::kNotImproved, Outcome::kNoDecision})
    EXPECT_EQ(outcome_from_symbol(std::string(1, outcome_symbol(o))), o);
  EXPECT_THROW(outcome_from_symbol("?"), Error);
}

TEST(Metrics, EvaluateCombinesAll) {
  const auto m = evaluate(Ranking{"d1", "d2", "d3"}, RelevantSet{"d1", "d3", "d9"});
  EXPECT_EQ(m.retrieved, 3u);
  EXPECT_EQ(m.relevant_retrieved, 2u);
  EXPECT_EQ(m.relevant_total, 3u);
  EXPECT_DOUBLE_EQ(m.precision_at(5), 0.4);
  EXPECT_DOUBLE_EQ(m.precision_at(1000), 0.002);
  EXPECT_THROW(m.precision_at(7), std::invalid_argument);
}

TEST(Metrics, CsvFieldsRoundTrip) {
  const auto m = evaluate(Ranking{"d1", "d2", "d3"}, RelevantSet{"d1", "d3"});
  const auto fields = metrics_fields(m);
  EXPECT_EQ(metrics_columns().size(), fields.size() + 1);
  EXPECT_EQ(metrics_columns().front(), "qid");
  EXPECT_EQ(metrics_columns()[8], "ap");
  EXPECT_EQ(metrics_columns().back(), "r100");
  EXPECT_EQ(fields[7], "0.833333");
  const auto back = parse_metrics_fields(fields, 2);
  EXPECT_EQ(metrics_fields(back), fields);

  const auto undefined = metrics_fields(evaluate(Ranking{"d1"}, RelevantSet{}));
  EXPECT_EQ(undefined[7], "NA");
  EXPECT_EQ(undefined.back(), "NA");
}

TEST(TrecRun, ParseOrdersByRank) {
  std::istringstream in("q1 Q0 b 2 0.5 t\nq1 Q0 a 1 0.9 t\nq2 Q0 c 1 1.0 t\n");
  const auto run = parse_trec_run(in);
  EXPECT_EQ(run.at("q1"), (Ranking{"a", "b"}));
  EXPECT_EQ(run.at("q2"), (Ranking{"c"}));
  std::istringstream bad("q1 Q0 a\n");
  EXPECT_THROW(parse_trec_run(bad), ParseError);
}

namespace {

struct Instance {
  Ranking ranking;
  RelevantSet relevant;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pool(1, 60), len(0, 60);
  const std::size_t n = pool(rng);
  Ranking docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back("d" + std::to_string(i));
  std::shuffle(docs.begin(), docs.end(), rng);
  Instance out;
  out.ranking.assign(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(std::min(n, len(rng))));
  for (std::size_t i = 0; i < n + 5; ++i) {
    if (rng() % 3 == 0) out.relevant.insert("d" + std::to_string(i));
  }
  return out;
}

}  // namespace

TEST(MetricsProperty, MatchesNaiveReference) {
  std::mt19937_64 rng(31337);
  for (int round = 0; round < 1000; ++round) {
    const auto [ranking, rel] = random_instance(rng);
    for (std::size_t k : {1u, 3u, 5u, 10u, 20u, 100u, 1000u})
      EXPECT_EQ(precision_at_k(ranking, rel, k), oracle::precision_at(ranking, rel, k));
    EXPECT_EQ(average_precision(ranking, rel), oracle::average_precision(ranking, rel));
    const auto curve = interpolated_11pt(ranking, rel);
    const auto expected = oracle::curve(ranking, rel);
    ASSERT_EQ(curve.has_value(), expected.has_value());
    if (!curve) continue;
    for (std::size_t i = 0; i < kCurvePoints; ++i) EXPECT_EQ((*curve)[i], (*expected)[i]);
    for (std::size_t i = 1; i < kCurvePoints; ++i) EXPECT_LE((*curve)[i], (*curve)[i - 1]);
    const auto m = evaluate(ranking, rel);
    for (double p : m.p_at) EXPECT_TRUE(p >= 0.0 && p <= 1.0);
    EXPECT_TRUE(*m.average_precision >= 0.0 && *m.average_precision <= 1.0);
  }
}

TEST(MetricsProperty, PrecisionInvariantToTailReordering) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 500; ++round) {
    auto [ranking, rel] = random_instance(rng);
    for (std::size_t k : kPrecisionCutoffs) {
      if (ranking.size() <= k) continue;
      Ranking shuffled = ranking;
      std::shuffle(shuffled.begin() + static_cast<std::ptrdiff_t>(k), shuffled.end(), rng);
      EXPECT_EQ(precision_at_k(shuffled, rel, k), precision_at_k(ranking, rel, k));
    }
  }
}

TEST(ClassifyProperty, TrichotomyAndAntisymmetry) {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> level(0, 4);
  for (int round = 0; round < 1000; ++round) {
    Curve11 a, b;
    for (auto& v : a) v = level(rng) / 4.0;
    for (auto& v : b) v = level(rng) / 4.0;
    if (round % 3 == 0) {
      for (std::size_t i = 0; i < kCurvePoints; ++i) b[i] = a[i] + 0.125;
    }
    const Outcome ab = classify(a, b), ba = classify(b, a);
    EXPECT_EQ(outcome_symbol(ab), oracle::classify(a, b));
    EXPECT_EQ(ab == Outcome::kImproved, ba == Outcome::kNotImproved);
    EXPECT_EQ(ab == Outcome::kNoDecision, ba == Outcome::kNoDecision);
    EXPECT_EQ(classify(a, a), Outcome::kNoDecision);
  }
}

TEST(EvaluateJudgments, MatchesStringPath) {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 300; ++round) {
    const auto [ranking, rel] = random_instance(rng);
    std::vector<std::uint8_t> flags;
    for (const auto& id : ranking) flags.push_back(rel.count(id) ? 1 : 0);
    EXPECT_EQ(evaluate_judgments(flags, rel.size()), evaluate(ranking, rel));
  }
}
