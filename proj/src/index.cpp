#include "assocprf/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"
#include "assocprf/varint.hpp"

namespace assocprf {

// --------------------------------------------------------------------------
// InvertedIndex

const Document& InvertedIndex::document(DocId id) const {
  if (id >= documents_.size()) throw std::out_of_range("unknown doc id " + std::to_string(id));
  return documents_[id];
}

std::optional<DocId> InvertedIndex::find_document(std::string_view external_id) const {
  auto it = std::lower_bound(documents_.begin(), documents_.end(), external_id,
                             [](const Document& d, std::string_view id) { return d.external_id < id; });
  if (it == documents_.end() || it->external_id != external_id) return std::nullopt;
  return it->doc_id;
}

std::optional<TermId> InvertedIndex::find(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term,
                             [](const std::string& t, std::string_view key) { return t < key; });
  if (it == terms_.end() || *it != term) return std::nullopt;
  return static_cast<TermId>(it - terms_.begin());
}

std::uint32_t InvertedIndex::doc_freq(TermId id) const {
  return static_cast<std::uint32_t>(postings(id).size());
}

std::span<const Posting> InvertedIndex::postings(TermId id) const {
  if (id >= terms_.size()) throw std::out_of_range("unknown term id " + std::to_string(id));
  return std::span(postings_).subspan(posting_offsets_[id],
                                      posting_offsets_[id + 1] - posting_offsets_[id]);
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto id = find(term);
  if (!id) return {};
  return postings(*id);
}

std::span<const TermFrequency> InvertedIndex::document_terms(DocId id) const {
  if (id >= documents_.size()) throw std::out_of_range("unknown doc id " + std::to_string(id));
  return std::span(forward_).subspan(forward_offsets_[id],
                                     forward_offsets_[id + 1] - forward_offsets_[id]);
}

std::uint32_t InvertedIndex::term_freq(TermId term, DocId doc) const {
  auto terms = document_terms(doc);
  auto it = std::lower_bound(terms.begin(), terms.end(), term,
                             [](const TermFrequency& tf, TermId t) { return tf.term < t; });
  return it != terms.end() && it->term == term ? it->freq : 0;
}

std::uint64_t InvertedIndex::total_tokens() const noexcept {
  std::uint64_t total = 0;
  for (const auto& d : documents_) total += d.length;
  return total;
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
  return analyzer_ == other.analyzer_ && documents_ == other.documents_ &&
         terms_ == other.terms_ && posting_offsets_ == other.posting_offsets_ &&
         postings_ == other.postings_;
}

void InvertedIndex::finalize() {
  std::vector<std::size_t> counts(documents_.size(), 0);
  for (const auto& p : postings_) ++counts[p.doc_id];
  forward_offsets_.assign(documents_.size() + 1, 0);
  for (std::size_t d = 0; d < documents_.size(); ++d)
    forward_offsets_[d + 1] = forward_offsets_[d] + counts[d];
  forward_.assign(postings_.size(), {});
  std::vector<std::size_t> cursor(forward_offsets_.begin(), forward_offsets_.end() - 1);
  // Terms are visited in ascending id order, so each forward list comes out sorted.
  for (TermId t = 0; t < terms_.size(); ++t) {
    for (const auto& p : postings(t)) forward_[cursor[p.doc_id]++] = {t, p.term_freq};
  }
}

// --------------------------------------------------------------------------
// IndexBuilder

IndexBuilder::IndexBuilder(AnalyzerConfig config) : config_(std::move(config)) {}

void IndexBuilder::add_text(std::string external_id, std::string_view text) {
  pending_.push_back({std::move(external_id), tokenize(text, config_)});
}

void IndexBuilder::add_tokens(std::string external_id, std::span<const std::string> tokens) {
  pending_.push_back({std::move(external_id), {tokens.begin(), tokens.end()}});
}

InvertedIndex IndexBuilder::build() && {
  std::sort(pending_.begin(), pending_.end(),
            [](const PendingDoc& a, const PendingDoc& b) { return a.external_id < b.external_id; });
  for (std::size_t i = 1; i < pending_.size(); ++i) {
    if (pending_[i].external_id == pending_[i - 1].external_id)
      throw Error("duplicate external id: " + pending_[i].external_id);
  }

  InvertedIndex index;
  index.analyzer_ = config_;
  std::unordered_map<std::string, std::vector<Posting>> dictionary;
  std::unordered_map<std::string_view, std::uint32_t> counts;
  for (std::size_t d = 0; d < pending_.size(); ++d) {
    const auto id = static_cast<DocId>(d);
    auto& doc = pending_[d];
    index.documents_.push_back({id, doc.external_id, static_cast<std::uint32_t>(doc.tokens.size())});
    counts.clear();
    for (const auto& token : doc.tokens) ++counts[token];
    for (const auto& [token, n] : counts) dictionary[std::string(token)].push_back({id, n});
  }

  index.terms_.reserve(dictionary.size());
  for (const auto& entry : dictionary) index.terms_.push_back(entry.first);
  std::sort(index.terms_.begin(), index.terms_.end());
  index.posting_offsets_.assign(1, 0);
  for (const auto& term : index.terms_) {
    auto& list = dictionary[term];
    // Per-document counts were emitted in doc order, one per document.
    index.postings_.insert(index.postings_.end(), list.begin(), list.end());
    index.posting_offsets_.push_back(index.postings_.size());
  }
  index.finalize();
  pending_.clear();
  return index;
}

// --------------------------------------------------------------------------
// Corpus

InvertedIndex build_index(const std::filesystem::path& corpus_dir, const AnalyzerConfig& config,
                          BuildReport* report, unsigned workers) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) throw Error("not a directory: " + corpus_dir.string());

  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(corpus_dir, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    // A dangling symlink is kept so that its read failure is reported.
    const bool candidate = it->is_regular_file(ec) || (!it->exists(ec) && it->is_symlink(ec));
    if (candidate && it->path().extension() == ".txt") files.push_back(it->path());
    ec.clear();
  }
  if (ec) throw IoError("cannot walk " + corpus_dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  struct Slot {
    std::string external_id;
    std::vector<std::string> tokens;
    std::string error;
    bool ok = false;
  };
  std::vector<Slot> slots(files.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      slots[i].external_id = files[i].lexically_relative(corpus_dir).generic_string();
      try {
        slots[i].tokens = tokenize(read_file_text(files[i]), config);
        slots[i].ok = true;
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
  if (workers <= 1) {
    work(0, files.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (files.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(files.size(), begin + chunk);
      if (begin < end) threads.emplace_back(work, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  IndexBuilder builder(config);
  std::size_t readable = 0;
  for (auto& slot : slots) {
    if (!slot.ok) {
      if (report) report->file_errors.push_back({slot.external_id, slot.error});
      continue;
    }
    ++readable;
    builder.add_tokens(std::move(slot.external_id), slot.tokens);
  }
  if (readable == 0) throw Error("no readable .txt files under " + corpus_dir.string());
  return std::move(builder).build();
}

// --------------------------------------------------------------------------
// Persistence
//
// Layout (all fixed-width integers little-endian):
//   magic "APRFIDX\0" | u32 version | u64 file size | u64 analyzer fingerprint
//   varint len + analyzer config text
//   varint doc count, then per doc: varint len + external id, varint length
//   varint term count, then per term: varint len + bytes, varint df,
//     df x (varint doc id delta, varint tf)
//   u32 crc32 of every preceding byte

namespace {

constexpr char kMagic[8] = {'A', 'P', 'R', 'F', 'I', 'D', 'X', '\0'};
constexpr std::size_t kHeaderSize = 8 + 4 + 8 + 8;
constexpr std::size_t kTrailerSize = 4;

void put_fixed(std::vector<std::uint8_t>& out, std::uint64_t value, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_fixed(std::span<const std::uint8_t> in, std::size_t pos, int width) {
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) value |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  return value;
}

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  varint::append(out, s.size());
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint64_t number(const char* what) {
    std::uint64_t value = 0;
    if (!varint::read(bytes_, pos_, value)) fail(what);
    return value;
  }

  std::string string(const char* what) {
    const std::uint64_t n = number(what);
    if (n > bytes_.size() - pos_) fail(what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }

  [[noreturn]] static void fail(const char* what) {
    throw IndexFormatError(std::string("malformed index payload: ") + what);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

}  // namespace

std::vector<std::uint8_t> encode_index(const InvertedIndex& index) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_fixed(out, kIndexFormatVersion, 4);
  put_fixed(out, 0, 8);  // patched below
  put_fixed(out, index.analyzer().fingerprint(), 8);
  put_string(out, index.analyzer().serialize());

  varint::append(out, index.doc_count());
  for (const auto& doc : index.documents()) {
    put_string(out, doc.external_id);
    varint::append(out, doc.length);
  }
  varint::append(out, index.term_count());
  for (TermId t = 0; t < index.term_count(); ++t) {
    put_string(out, index.term(t));
    auto list = index.postings(t);
    varint::append(out, list.size());
    DocId previous = 0;
    for (const auto& p : list) {
      varint::append(out, p.doc_id - previous);
      varint::append(out, p.term_freq);
      previous = p.doc_id;
    }
  }

  const std::uint64_t total = out.size() + kTrailerSize;
  for (int i = 0; i < 8; ++i) out[12 + i] = static_cast<std::uint8_t>(total >> (8 * i));
  put_fixed(out, crc32(std::span<const std::uint8_t>(out)), 4);
  return out;
}

InvertedIndex decode_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + kTrailerSize)
    throw IndexTruncatedError("index file truncated: " + std::to_string(bytes.size()) + " bytes");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw IndexFormatError("not an index file (bad magic)");
  const auto version = static_cast<std::uint32_t>(get_fixed(bytes, 8, 4));
  if (version != kIndexFormatVersion)
    throw IndexVersionError("unsupported index format version " + std::to_string(version) +
                            " (expected " + std::to_string(kIndexFormatVersion) + ")");
  const std::uint64_t declared = get_fixed(bytes, 12, 8);
  if (bytes.size() < declared)
    throw IndexTruncatedError("index file truncated: " + std::to_string(bytes.size()) + " of " +
                              std::to_string(declared) + " bytes");
  if (bytes.size() > declared) throw IndexFormatError("trailing bytes after index payload");
  const std::size_t body = bytes.size() - kTrailerSize;
  const auto stored_crc = static_cast<std::uint32_t>(get_fixed(bytes, body, 4));
  if (crc32(bytes.first(body)) != stored_crc) throw IndexChecksumError("index checksum mismatch");

  InvertedIndex index;
  Reader reader(bytes.first(body), kHeaderSize);
  index.analyzer_ = AnalyzerConfig::deserialize(reader.string("analyzer config"));
  if (index.analyzer_.fingerprint() != get_fixed(bytes, 20, 8))
    throw IndexFormatError("analyzer fingerprint does not match stored config");

  const std::uint64_t doc_count = reader.number("doc count");
  if (doc_count > body) Reader::fail("doc count");
  index.documents_.reserve(doc_count);
  for (std::uint64_t d = 0; d < doc_count; ++d) {
    Document doc;
    doc.doc_id = static_cast<DocId>(d);
    doc.external_id = reader.string("external id");
    doc.length = static_cast<std::uint32_t>(reader.number("doc length"));
    if (d > 0 && !(index.documents_.back().external_id < doc.external_id))
      Reader::fail("documents not in external id order");
    index.documents_.push_back(std::move(doc));
  }

  const std::uint64_t term_count = reader.number("term count");
  if (term_count > body) Reader::fail("term count");
  index.terms_.reserve(term_count);
  index.posting_offsets_.assign(1, 0);
  for (std::uint64_t t = 0; t < term_count; ++t) {
    std::string term = reader.string("term");
    if (term.empty() || (t > 0 && !(index.terms_.back() < term))) Reader::fail("dictionary order");
    const std::uint64_t df = reader.number("doc freq");
    if (df == 0 || df > doc_count) Reader::fail("doc freq");
    std::uint64_t doc = 0;
    for (std::uint64_t i = 0; i < df; ++i) {
      const std::uint64_t delta = reader.number("doc delta");
      if (i > 0 && delta == 0) Reader::fail("postings order");
      doc += delta;
      const std::uint64_t tf = reader.number("term freq");
      if (doc >= doc_count || tf == 0) Reader::fail("posting");
      index.postings_.push_back({static_cast<DocId>(doc), static_cast<std::uint32_t>(tf)});
    }
    index.terms_.push_back(std::move(term));
    index.posting_offsets_.push_back(index.postings_.size());
  }
  if (reader.position() != body) Reader::fail("unexpected bytes before checksum");
  index.finalize();
  return index;
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  write_file_atomic(path, std::span<const std::uint8_t>(encode_index(index)));
}

InvertedIndex load_index(const std::filesystem::path& path) {
  return decode_index(read_file_bytes(path));
}

}  // namespace assocprf
