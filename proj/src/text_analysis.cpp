#include "assocprf/text_analysis.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <charconv>
#include <fstream>

#include "assocprf/error.hpp"

namespace assocprf {
namespace {

constexpr char32_t kTatweel = 0x0640;
constexpr char32_t kAlef = 0x0627;
constexpr char32_t kTaMarbuta = 0x0629;
constexpr char32_t kHa = 0x0647;
constexpr char32_t kAlefMaqsura = 0x0649;
constexpr char32_t kYa = 0x064A;

bool is_arabic_mark(char32_t c) {
  return (c >= 0x0610 && c <= 0x061A) || (c >= 0x064B && c <= 0x065F) || c == 0x0670 ||
         (c >= 0x06D6 && c <= 0x06DC) || (c >= 0x06DF && c <= 0x06E4) ||
         (c >= 0x06E7 && c <= 0x06E8) || (c >= 0x06EA && c <= 0x06ED);
}

bool is_word_char(char32_t c) {
  return u_isalpha(static_cast<UChar32>(c)) ||
         u_charType(static_cast<UChar32>(c)) == U_DECIMAL_DIGIT_NUMBER;
}

bool is_mark(char32_t c) {
  return (U_GET_GC_MASK(static_cast<UChar32>(c)) & U_GC_M_MASK) != 0;
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? char32_t{0xFFFD} : static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  U8_APPEND_UNSAFE(buf, n, static_cast<UChar32>(c));
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

std::string nfkc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("ICU NFKC unavailable: ") + u_errorName(status));
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw Error(std::string("NFKC normalization failed: ") + u_errorName(status));
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

void fold_arabic_in_place(std::u32string& token) {
  std::u32string folded;
  folded.reserve(token.size());
  for (char32_t c : token) {
    if (c == kTatweel || is_arabic_mark(c)) continue;
    if (c == 0x0622 || c == 0x0623 || c == 0x0625) c = kAlef;
    folded.push_back(c);
  }
  if (!folded.empty()) {
    char32_t& last = folded.back();
    if (last == kTaMarbuta) last = kHa;
    else if (last == kAlefMaqsura) last = kYa;
  }
  token.swap(folded);
}

// Stopword entries and config values may contain the separators below.
std::string escape_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '%' || c == ';' || c == ',' || c == '=') {
      static constexpr char kHex[] = "0123456789ABCDEF";
      out.push_back('%');
      out.push_back(kHex[(static_cast<unsigned char>(c) >> 4) & 0xF]);
      out.push_back(kHex[static_cast<unsigned char>(c) & 0xF]);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%') {
      if (i + 2 >= s.size()) throw Error("bad escape in analyzer config");
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, value, 16);
      if (ec != std::errc{} || ptr != s.data() + i + 3) throw Error("bad escape in analyzer config");
      out.push_back(static_cast<char>(value));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

}  // namespace

std::string AnalyzerConfig::serialize() const {
  std::string out;
  out += "lowercase=";
  out += lowercase ? "1" : "0";
  out += ";normalization=";
  out += unicode_normalization == UnicodeNormalization::kNfkc ? "nfkc" : "none";
  out += ";fold_arabic=";
  out += arabic_orthographic_folding ? "1" : "0";
  out += ";min_length=" + std::to_string(min_token_length);
  out += ";stopwords=";
  bool first = true;
  for (const auto& word : stopwords) {
    if (!first) out += ',';
    out += escape_field(word);
    first = false;
  }
  return out;
}

AnalyzerConfig AnalyzerConfig::deserialize(std::string_view text) {
  AnalyzerConfig config;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view field = text.substr(pos, end - pos);
    std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) throw Error("malformed analyzer config: " + std::string(text));
    std::string_view key = field.substr(0, eq);
    std::string_view value = field.substr(eq + 1);
    if (key == "lowercase") {
      config.lowercase = value == "1";
    } else if (key == "normalization") {
      if (value == "nfkc") config.unicode_normalization = UnicodeNormalization::kNfkc;
      else if (value == "none") config.unicode_normalization = UnicodeNormalization::kNone;
      else throw Error("unknown normalization: " + std::string(value));
    } else if (key == "fold_arabic") {
      config.arabic_orthographic_folding = value == "1";
    } else if (key == "min_length") {
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (ec != std::errc{} || ptr != value.data() + value.size() || n == 0)
        throw Error("bad min_length: " + std::string(value));
      config.min_token_length = n;
    } else if (key == "stopwords") {
      std::size_t p = 0;
      while (!value.empty() && p <= value.size()) {
        std::size_t comma = value.find(',', p);
        if (comma == std::string_view::npos) comma = value.size();
        config.stopwords.insert(unescape_field(value.substr(p, comma - p)));
        p = comma + 1;
      }
    } else {
      throw Error("unknown analyzer config key: " + std::string(key));
    }
    pos = end + 1;
  }
  return config;
}

std::uint64_t AnalyzerConfig::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fold_arabic(std::string_view token) {
  std::u32string cps = decode_utf8(token);
  fold_arabic_in_place(cps);
  return encode_utf8(cps);
}

namespace {

// Removing tatweel or marks can expose a leading mark or a new canonical
// composition; repeat until the token is stable so tokenize stays idempotent.
void refold(std::u32string& token, const AnalyzerConfig& config) {
  for (int round = 0; round < 4; ++round) {
    const std::u32string before = token;
    fold_arabic_in_place(token);
    std::size_t lead = 0;
    while (lead < token.size() && is_mark(token[lead])) ++lead;
    token.erase(0, lead);
    if (token != before && config.unicode_normalization == UnicodeNormalization::kNfkc) {
      token = decode_utf8(nfkc(encode_utf8(token)));
      if (config.lowercase) {
        for (char32_t& c : token) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
      }
    }
    if (token == before) return;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const AnalyzerConfig& config) {
  std::vector<std::string> tokens;
  if (text.empty()) return tokens;

  std::string normalized;
  if (config.unicode_normalization == UnicodeNormalization::kNfkc) {
    normalized = nfkc(text);
    text = normalized;
  }
  std::u32string cps = decode_utf8(text);
  if (config.lowercase) {
    for (char32_t& c : cps) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
  }

  auto emit = [&](std::u32string& current) {
    if (current.empty()) return;
    if (config.arabic_orthographic_folding) refold(current, config);
    if (current.size() >= config.min_token_length && !current.empty()) {
      std::string token = encode_utf8(current);
      if (!config.stopwords.contains(token)) tokens.push_back(std::move(token));
    }
    current.clear();
  };

  std::u32string current;
  for (char32_t c : cps) {
    if (is_word_char(c) || (!current.empty() && is_mark(c))) {
      current.push_back(c);
    } else {
      emit(current);
    }
  }
  emit(current);
  return tokens;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path,
                                     const AnalyzerConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read stopword file: " + path.string());
  AnalyzerConfig bare = config;
  bare.stopwords.clear();
  bare.min_token_length = 1;
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    for (auto& token : tokenize(line, bare)) words.insert(std::move(token));
  }
  return words;
}

}  // namespace assocprf
