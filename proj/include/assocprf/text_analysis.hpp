#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace assocprf {

enum class UnicodeNormalization {
  kNone,
  kNfkc,  // compatibility decomposition followed by canonical composition
};

struct AnalyzerConfig {
  bool lowercase = true;
  UnicodeNormalization unicode_normalization = UnicodeNormalization::kNfkc;
  bool arabic_orthographic_folding = false;
  std::set<std::string> stopwords;
  std::size_t min_token_length = 1;  // in code points

  /// Canonical single-line text form, stable across runs. Stored in index
  /// files so queries are analyzed exactly like the documents were.
  std::string serialize() const;
  static AnalyzerConfig deserialize(std::string_view text);

  /// 64-bit FNV-1a of serialize().
  std::uint64_t fingerprint() const;

  bool operator==(const AnalyzerConfig&) const = default;
};

/// Splits on every code point that is neither a letter nor a decimal digit.
/// Combining marks stay attached to the token they follow.
///
/// Stages run in this order: unicode normalization, lowercase, arabic
/// folding, stopword removal, minimum length. Order and multiplicity of the
/// surviving tokens are preserved. Invalid UTF-8 is replaced, not rejected.
std::vector<std::string> tokenize(std::string_view text, const AnalyzerConfig& config);

/// Maps alef variants to bare alef, token-final ta marbuta to ha and
/// token-final alef maqsura to ya, and strips tatweel and harakat. Identity on
/// text without Arabic script.
std::string fold_arabic(std::string_view token);

/// Reads a stopword file (UTF-8, one token per line, '#' starts a comment
/// line). Entries pass through the same normalization as document text.
std::set<std::string> load_stopwords(const std::filesystem::path& path,
                                     const AnalyzerConfig& config);

}  // namespace assocprf
