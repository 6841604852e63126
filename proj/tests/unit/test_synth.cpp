#include <gtest/gtest.h>

#include <set>

#include "assocprf/queries.hpp"
#include "assocprf/text_analysis.hpp"
#include "assocprf/synth.hpp"
#include "oracles.hpp"

using namespace assocprf;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.documents = 300;
  c.queries = 8;
  c.planted = 4;
  c.vocabulary = 800;
  c.seed = 7;
  return c;
}

std::set<std::string> words_of(const SynthCorpus& corpus, const std::string& id) {
  for (const auto& [doc_id, text] : corpus.documents) {
    if (doc_id == id) {
      const auto tokens = tokenize(text, AnalyzerConfig{});
      return {tokens.begin(), tokens.end()};
    }
  }
  ADD_FAILURE() << "no document " << id;
  return {};
}

}  // namespace

TEST(Synth, SameSeedSameCorpus) {
  const auto a = generate_synthetic(small());
  const auto b = generate_synthetic(small());
  EXPECT_EQ(a.documents, b.documents);
  ASSERT_EQ(a.planted.size(), b.planted.size());
  for (std::size_t i = 0; i < a.planted.size(); ++i) {
    EXPECT_EQ(a.planted[i].query_terms, b.planted[i].query_terms);
    EXPECT_EQ(a.planted[i].head_docs, b.planted[i].head_docs);
  }
  auto other = small();
  other.seed = 8;
  EXPECT_NE(generate_synthetic(other).documents, a.documents);
}

TEST(Synth, Shape) {
  const auto corpus = generate_synthetic(small());
  EXPECT_EQ(corpus.documents.size(), 300u);
  EXPECT_EQ(corpus.queries.size(), 8u);
  EXPECT_EQ(corpus.planted.size(), 4u);
  EXPECT_EQ(corpus.documents.front().first, "doc_00001.txt");
  EXPECT_EQ(corpus.queries.front().id, "q01");
  std::set<std::string> qids;
  for (const auto& q : corpus.queries) qids.insert(q.id);
  for (const auto& line : corpus.qrels) EXPECT_TRUE(qids.count(line.qid)) << line.qid;
  EXPECT_TRUE(std::is_sorted(corpus.qrels.begin(), corpus.qrels.end(), [](const auto& a, const auto& b) {
    return std::tie(a.qid, a.external_id) < std::tie(b.qid, b.external_id);
  }));
}

TEST(Synth, Validate) {
  EXPECT_NO_THROW(small().validate());
  auto c = small();
  c.planted = c.queries + 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.documents = 10;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.min_length = c.max_length + 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = small();
  c.queries = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Synth, PlantedStructure) {
  const auto corpus = generate_synthetic(small());
  for (const auto& p : corpus.planted) {
    ASSERT_FALSE(p.head_docs.empty());
    ASSERT_FALSE(p.tail_docs.empty());
    std::set<std::string> relevant;
    for (const auto& line : corpus.qrels) {
      if (line.qid == p.qid && line.relevance > 0) relevant.insert(line.external_id);
    }
    std::set<std::string> planted(p.head_docs.begin(), p.head_docs.end());
    planted.insert(p.tail_docs.begin(), p.tail_docs.end());
    EXPECT_EQ(relevant, planted) << p.qid;
    for (const auto& id : relevant) EXPECT_TRUE(words_of(corpus, id).count(p.expansion_term)) << id;
    for (const auto& id : p.head_docs) {
      const auto words = words_of(corpus, id);
      for (const auto& t : p.query_terms) EXPECT_TRUE(words.count(t)) << id << " " << t;
    }
    for (const auto& id : p.tail_docs) {
      const auto words = words_of(corpus, id);
      for (const auto& t : p.query_terms) EXPECT_FALSE(words.count(t)) << id << " " << t;
    }
  }
}

TEST(Synth, WriteAndReadBack) {
  oracle::TempDir dir;
  const auto corpus = generate_synthetic(small());
  write_synthetic(corpus, dir.path());
  EXPECT_TRUE(std::filesystem::exists(dir / "corpus/doc_00300.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "queries.tsv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "qrels.txt"));
  const auto planted = read_planted(dir / "planted.tsv");
  ASSERT_EQ(planted.size(), corpus.planted.size());
  for (std::size_t i = 0; i < planted.size(); ++i) {
    EXPECT_EQ(planted[i].qid, corpus.planted[i].qid);
    EXPECT_EQ(planted[i].query_terms, corpus.planted[i].query_terms);
    EXPECT_EQ(planted[i].expansion_term, corpus.planted[i].expansion_term);
    EXPECT_EQ(planted[i].head_docs, corpus.planted[i].head_docs);
    EXPECT_EQ(planted[i].tail_docs, corpus.planted[i].tail_docs);
  }
  const auto queries = parse_queries(dir / "queries.tsv");
  EXPECT_EQ(queries.size(), corpus.queries.size());
}
