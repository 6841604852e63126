#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"
#include "assocprf/index.hpp"
#include "assocprf/varint.hpp"
#include "oracles.hpp"

using namespace assocprf;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::uint32_t df(const InvertedIndex& index, const std::string& term) {
  const auto id = index.find(term);
  return id ? index.doc_freq(*id) : 0;
}

std::uint32_t tf(const InvertedIndex& index, const std::string& term, const std::string& doc) {
  return index.term_freq(*index.find(term), *index.find_document(doc));
}

}  // namespace

TEST(Index, MicroCorpusCounts) {
  const auto index = oracle::micro_index();
  EXPECT_EQ(index.doc_count(), 3u);
  EXPECT_EQ(index.term_count(), 4u);
  EXPECT_EQ(df(index, "sun"), 2u);
  EXPECT_EQ(df(index, "moon"), 2u);
  EXPECT_EQ(df(index, "star"), 1u);
  EXPECT_EQ(df(index, "comet"), 1u);
  EXPECT_EQ(tf(index, "sun", "d1"), 2u);
  EXPECT_EQ(tf(index, "comet", "d3"), 2u);
  EXPECT_EQ(index.total_tokens(), 8u);
}

TEST(Index, Postings) {
  const auto index = oracle::micro_index();
  const auto d1 = *index.find_document("d1"), d2 = *index.find_document("d2"), d3 = *index.find_document("d3");
  const auto sun = index.postings(std::string_view("sun"));
  ASSERT_EQ(sun.size(), 2u);
  EXPECT_EQ(sun[0], (Posting{d1, 2}));
  EXPECT_EQ(sun[1], (Posting{d3, 1}));
  const auto star = index.postings(std::string_view("star"));
  ASSERT_EQ(star.size(), 1u);
  EXPECT_EQ(star[0], (Posting{d2, 1}));
  EXPECT_TRUE(index.postings(std::string_view("xyz")).empty());
}

TEST(Index, TermIdsFollowByteOrder) {
  const auto index = oracle::micro_index();
  for (TermId t = 1; t < index.term_count(); ++t) EXPECT_LT(index.term(t - 1), index.term(t));
}

TEST(Index, DocIdsFollowExternalIdOrderRegardlessOfInsertion) {
  IndexBuilder builder{AnalyzerConfig{}};
  builder.add_text("zeta", "a");
  builder.add_text("alpha", "b");
  builder.add_text("mid", "c");
  const auto index = std::move(builder).build();
  EXPECT_EQ(index.document(0).external_id, "alpha");
  EXPECT_EQ(index.document(1).external_id, "mid");
  EXPECT_EQ(index.document(2).external_id, "zeta");
  EXPECT_THROW(index.document(3), std::out_of_range);
}

TEST(Index, DuplicateExternalIdRejected) {
  IndexBuilder builder{AnalyzerConfig{}};
  builder.add_text("a", "x");
  builder.add_text("a", "y");
  EXPECT_THROW(std::move(builder).build(), Error);
}

TEST(BuildIndex, DirectoryTree) {
  oracle::TempDir dir;
  write(dir / "c/d1.txt", "sun moon sun");
  write(dir / "c/d2.txt", "moon star");
  write(dir / "c/sub/d3.txt", "sun comet comet");
  write(dir / "c/notes.md", "ignored");
  BuildReport report;
  const auto index = build_index(dir / "c", {}, &report);
  EXPECT_EQ(index.doc_count(), 3u);
  EXPECT_EQ(index.term_count(), 4u);
  EXPECT_TRUE(index.find_document("sub/d3.txt").has_value());
  EXPECT_TRUE(report.file_errors.empty());
}

TEST(BuildIndex, SingleEmptyFile) {
  oracle::TempDir dir;
  write(dir / "c/empty.txt", "");
  const auto index = build_index(dir / "c", {});
  EXPECT_EQ(index.doc_count(), 1u);
  EXPECT_EQ(index.term_count(), 0u);
  EXPECT_EQ(index.document(0).length, 0u);
}

TEST(BuildIndex, EmptyDirectoryIsFatal) {
  oracle::TempDir dir;
  fs::create_directories(dir / "c");
  EXPECT_THROW(build_index(dir / "c", {}), Error);
}

TEST(BuildIndex, UnreadableFileRecordedAndSkipped) {
  oracle::TempDir dir;
  write(dir / "c/good.txt", "sun");
  // A dangling symlink named *.txt cannot be opened.
  fs::create_symlink(dir / "missing-target", dir / "c/bad.txt");
  BuildReport report;
  const auto index = build_index(dir / "c", {}, &report);
  EXPECT_EQ(index.doc_count(), 1u);
  ASSERT_EQ(report.file_errors.size(), 1u);
  EXPECT_EQ(report.file_errors[0].external_id, "bad.txt");
}

TEST(BuildIndex, WorkerCountDoesNotChangeResult) {
  oracle::TempDir dir;
  std::mt19937_64 rng(3);
  const auto corpus = oracle::random_corpus(rng, 40, 30, 4);
  for (const auto& [id, tokens] : corpus) {
    std::string text;
    for (const auto& t : tokens) text += t + " ";
    write(dir / ("c/" + id + ".txt"), text);
  }
  const auto one = build_index(dir / "c", {}, nullptr, 1);
  const auto four = build_index(dir / "c", {}, nullptr, 4);
  EXPECT_TRUE(one == four);
  EXPECT_EQ(encode_index(one), encode_index(four));
}

TEST(Persistence, RoundTrip) {
  oracle::TempDir dir;
  const auto index = oracle::micro_index();
  save_index(index, dir / "m.idx");
  const auto back = load_index(dir / "m.idx");
  EXPECT_TRUE(back == index);
  EXPECT_EQ(back.term_freq(*back.find("sun"), *back.find_document("d1")), 2u);
}

TEST(Persistence, SaveLeavesNoTemporaryFiles) {
  oracle::TempDir dir;
  save_index(oracle::micro_index(), dir / "m.idx");
  save_index(oracle::micro_index(), dir / "m.idx");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(Persistence, EmptyFileIsTruncation) {
  oracle::TempDir dir;
  write(dir / "empty.idx", "");
  EXPECT_THROW(load_index(dir / "empty.idx"), IndexTruncatedError);
}

TEST(Persistence, CorruptedByteIsChecksumError) {
  auto bytes = encode_index(oracle::micro_index());
  bytes[bytes.size() / 2] ^= 0x5a;
  EXPECT_THROW(decode_index(bytes), IndexChecksumError);
}

TEST(Persistence, CutFileIsTruncation) {
  auto bytes = encode_index(oracle::micro_index());
  bytes.resize(bytes.size() - 7);
  EXPECT_THROW(decode_index(bytes), IndexTruncatedError);
}

TEST(Persistence, WrongMagicIsFormatError) {
  auto bytes = encode_index(oracle::micro_index());
  bytes[0] = 'X';
  try {
    decode_index(bytes);
    FAIL() << "expected IndexFormatError";
  } catch (const IndexChecksumError&) {
    FAIL() << "magic must be checked before the checksum";
  } catch (const IndexFormatError&) {
  }
}

TEST(Persistence, OtherVersionIsVersionError) {
  auto bytes = encode_index(oracle::micro_index());
  bytes[8] = 99;  // version field follows the 8-byte magic
  EXPECT_THROW(decode_index(bytes), IndexVersionError);
}

TEST(Persistence, MissingFileIsIoError) {
  EXPECT_THROW(load_index("/nonexistent/dir/x.idx"), Error);
}

TEST(Persistence, AnalyzerTravelsWithTheIndex) {
  AnalyzerConfig config;
  config.arabic_orthographic_folding = true;
  config.stopwords = {"the"};
  IndexBuilder builder(config);
  builder.add_text("a", "the أضرار");
  const auto back = decode_index(encode_index(std::move(builder).build()));
  EXPECT_EQ(back.analyzer(), config);
  EXPECT_TRUE(back.find("اضرار").has_value());
}

TEST(Varint, RoundTripEdges) {
  for (std::uint64_t v : {0ULL, 1ULL, 127ULL, 128ULL, 300ULL, (1ULL << 32) - 1, ~0ULL}) {
    std::vector<std::uint8_t> buf;
    varint::append(buf, v);
    std::size_t pos = 0;
    std::uint64_t back = 0;
    ASSERT_TRUE(varint::read(buf, pos, back));
    EXPECT_EQ(back, v);
    EXPECT_EQ(pos, buf.size());
  }
  std::vector<std::uint8_t> cut{0x80};
  std::size_t pos = 0;
  std::uint64_t v = 0;
  EXPECT_FALSE(varint::read(cut, pos, v));
}

// Random corpora: doc_freq and term_freq against a naive recount, the
// postings-count identity, and persistence round trips.
TEST(IndexProperty, MatchesNaiveRecount) {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 300; ++round) {
    const auto corpus = oracle::random_corpus(rng, 10, 8, 5);
    const auto index = oracle::build(corpus);

    std::size_t distinct_per_doc = 0;
    std::set<std::string> vocab;
    for (const auto& [id, tokens] : corpus) {
      const auto counts = oracle::counts(tokens);
      distinct_per_doc += counts.size();
      const DocId doc = *index.find_document(id);
      EXPECT_EQ(index.document(doc).length, tokens.size());
      for (const auto& [term, n] : counts) {
        vocab.insert(term);
        EXPECT_EQ(index.term_freq(*index.find(term), doc), n);
      }
    }
    EXPECT_EQ(index.term_count(), vocab.size());
    EXPECT_EQ(index.posting_count(), distinct_per_doc);
    for (const auto& term : vocab) {
      std::uint32_t expected = 0;
      for (const auto& [id, tokens] : corpus) expected += oracle::counts(tokens).count(term);
      const TermId t = *index.find(term);
      EXPECT_EQ(index.doc_freq(t), expected);
      const auto postings = index.postings(t);
      EXPECT_EQ(postings.size(), expected);
      for (std::size_t i = 1; i < postings.size(); ++i) EXPECT_LT(postings[i - 1].doc_id, postings[i].doc_id);
      for (const auto& p : postings) EXPECT_LT(p.doc_id, index.doc_count());
    }
    EXPECT_TRUE(decode_index(encode_index(index)) == index);
    EXPECT_TRUE(oracle::build(corpus) == index);
  }
}
