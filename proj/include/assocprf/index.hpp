#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "assocprf/text_analysis.hpp"

namespace assocprf {

using DocId = std::uint32_t;
using TermId = std::uint32_t;

struct Document {
  DocId doc_id = 0;
  std::string external_id;
  std::uint32_t length = 0;  // token count

  bool operator==(const Document&) const = default;
};

struct Posting {
  DocId doc_id = 0;
  std::uint32_t term_freq = 0;

  bool operator==(const Posting&) const = default;
};

/// One entry of a document's forward list.
struct TermFrequency {
  TermId term = 0;
  std::uint32_t freq = 0;

  bool operator==(const TermFrequency&) const = default;
};

/// Immutable inverted index. Terms are numbered in ascending byte order of
/// their UTF-8 form, so comparing TermIds is comparing tokens
/// lexicographically. Documents are numbered in ascending external_id order.
///
/// A forward list (document -> sorted term frequencies) is kept alongside the
/// postings; it is derived data and never persisted.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  std::size_t doc_count() const noexcept { return documents_.size(); }
  std::size_t term_count() const noexcept { return terms_.size(); }
  const AnalyzerConfig& analyzer() const noexcept { return analyzer_; }

  std::span<const Document> documents() const noexcept { return documents_; }
  /// Throws std::out_of_range for an unknown doc id.
  const Document& document(DocId id) const;
  std::optional<DocId> find_document(std::string_view external_id) const;

  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::uint32_t doc_freq(TermId id) const;
  std::span<const Posting> postings(TermId id) const;
  /// Empty span for a term not in the dictionary.
  std::span<const Posting> postings(std::string_view term) const;

  std::span<const TermFrequency> document_terms(DocId id) const;
  /// 0 when the term does not occur in the document.
  std::uint32_t term_freq(TermId term, DocId doc) const;

  std::uint64_t total_tokens() const noexcept;
  std::size_t posting_count() const noexcept { return postings_.size(); }

  /// Structural equality over analyzer, documents, dictionary and postings.
  bool operator==(const InvertedIndex& other) const;

 private:
  friend class IndexBuilder;
  friend InvertedIndex decode_index(std::span<const std::uint8_t> bytes);

  void finalize();  // builds the forward lists

  AnalyzerConfig analyzer_;
  std::vector<Document> documents_;
  std::vector<std::string> terms_;
  std::vector<std::size_t> posting_offsets_{0};  // terms_.size() + 1 entries
  std::vector<Posting> postings_;

  std::vector<std::size_t> forward_offsets_{0};
  std::vector<TermFrequency> forward_;
};

/// Accumulates documents in any order; build() assigns doc ids by sorted
/// external_id, so the result does not depend on insertion order.
class IndexBuilder {
 public:
  explicit IndexBuilder(AnalyzerConfig config);

  /// Tokenizes `text` with the builder's analyzer.
  void add_text(std::string external_id, std::string_view text);
  void add_tokens(std::string external_id, std::span<const std::string> tokens);

  /// Throws Error on duplicate external ids.
  InvertedIndex build() &&;

 private:
  struct PendingDoc {
    std::string external_id;
    std::vector<std::string> tokens;
  };

  AnalyzerConfig config_;
  std::vector<PendingDoc> pending_;
};

struct FileError {
  std::string external_id;
  std::string message;
};

struct BuildReport {
  std::vector<FileError> file_errors;
};

/// Indexes every regular `.txt` file under `corpus_dir`, one document per
/// file, external_id = path relative to `corpus_dir` with '/' separators.
/// Unreadable files are recorded in `report` and skipped. Throws Error when no
/// file could be read.
InvertedIndex build_index(const std::filesystem::path& corpus_dir, const AnalyzerConfig& config,
                          BuildReport* report = nullptr, unsigned workers = 1);

/// Writes to a temporary file next to `path`, then renames it into place.
void save_index(const InvertedIndex& index, const std::filesystem::path& path);

/// Throws IndexTruncatedError, IndexVersionError, IndexChecksumError or
/// IndexFormatError depending on what is wrong with the file.
InvertedIndex load_index(const std::filesystem::path& path);

/// Serialized byte image, exactly what save_index writes.
std::vector<std::uint8_t> encode_index(const InvertedIndex& index);
InvertedIndex decode_index(std::span<const std::uint8_t> bytes);

inline constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace assocprf
