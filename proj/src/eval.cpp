#include "assocprf/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "assocprf/csv.hpp"
#include "assocprf/error.hpp"

namespace assocprf {
namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) parts.push_back(line.substr(start, i - start));
  }
  return parts;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error("bad number in metrics row: '" + text + "'");
  }
  if (used != text.size()) throw Error("bad number in metrics row: '" + text + "'");
  return value;
}

std::size_t parse_count(const std::string& text) {
  std::size_t value = 0;
  if (!parse_number(text, value)) throw Error("bad count in metrics row: '" + text + "'");
  return value;
}

std::vector<std::uint8_t> judge(std::span<const std::string> ranking, const RelevantSet& relevant) {
  std::vector<std::uint8_t> flags(ranking.size(), 0);
  for (std::size_t i = 0; i < ranking.size(); ++i) flags[i] = relevant.contains(ranking[i]) ? 1 : 0;
  return flags;
}

double precision_at(std::span<const std::uint8_t> judged, std::size_t k) {
  const std::size_t depth = std::min(k, judged.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) hits += judged[i] != 0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision_of(std::span<const std::uint8_t> judged, std::size_t total) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < judged.size(); ++i) {
    if (judged[i] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total);
}

Curve11 curve_of(std::span<const std::uint8_t> judged, std::size_t total) {
  std::vector<std::size_t> ranks;  // 1-based ranks of the relevant hits
  for (std::size_t i = 0; i < judged.size(); ++i) {
    if (judged[i] != 0) ranks.push_back(i + 1);
  }
  const std::size_t hits = ranks.size();
  // suffix_best[h] = best precision among the points h..hits (1-based).
  std::vector<double> suffix_best(hits + 2, 0.0);
  for (std::size_t h = hits; h >= 1; --h) {
    const double precision = static_cast<double>(h) / static_cast<double>(ranks[h - 1]);
    suffix_best[h] = std::max(suffix_best[h + 1], precision);
  }
  Curve11 curve{};
  for (std::size_t level = 0; level < kCurvePoints; ++level) {
    // Smallest hit count whose recall h / total reaches level / 10.
    const std::size_t first = std::max<std::size_t>(1, (level * total + 9) / 10);
    curve[level] = first <= hits ? suffix_best[first] : 0.0;
  }
  return curve;
}

}  // namespace

const RelevantSet& Qrels::relevant(std::string_view qid) const {
  static const RelevantSet kEmpty;
  auto it = judged_.find(qid);
  return it == judged_.end() ? kEmpty : it->second;
}

void Qrels::add(std::string qid, std::string external_id, bool relevant) {
  auto& set = judged_[std::move(qid)];
  if (relevant) set.insert(std::move(external_id));
}

Qrels parse_qrels(std::istream& in, const std::string& source) {
  Qrels qrels;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto parts = split_whitespace(line);
    if (parts.empty()) continue;
    if (parts.size() != 4)
      throw ParseError(source, number, "expected 'qid iter docid rel', got " +
                                           std::to_string(parts.size()) + " fields");
    long rel = 0;
    if (!parse_number(parts[3], rel)) throw ParseError(source, number, "relevance is not an integer");
    qrels.add(std::string(parts[0]), std::string(parts[2]), rel > 0);
  }
  if (in.bad()) throw IoError("read failed: " + source);
  return qrels;
}

Qrels parse_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read qrels file: " + path.string());
  return parse_qrels(in, path.string());
}

double precision_at_k(std::span<const std::string> ranking, const RelevantSet& relevant,
                      std::size_t k) {
  if (k == 0) throw std::invalid_argument("precision cutoff must be >= 1");
  return precision_at(judge(ranking.first(std::min(k, ranking.size())), relevant), k);
}

std::optional<double> average_precision(std::span<const std::string> ranking,
                                        const RelevantSet& relevant) {
  if (relevant.empty()) return std::nullopt;
  return average_precision_of(judge(ranking, relevant), relevant.size());
}

std::optional<Curve11> interpolated_11pt(std::span<const std::string> ranking,
                                         const RelevantSet& relevant) {
  if (relevant.empty()) return std::nullopt;
  return curve_of(judge(ranking, relevant), relevant.size());
}

double QueryMetrics::precision_at(std::size_t cutoff) const {
  for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i) {
    if (kPrecisionCutoffs[i] == cutoff) return p_at[i];
  }
  throw std::invalid_argument("unsupported precision cutoff " + std::to_string(cutoff));
}

QueryMetrics evaluate(std::span<const std::string> ranking, const RelevantSet& relevant) {
  return evaluate_judgments(judge(ranking, relevant), relevant.size());
}

QueryMetrics evaluate_judgments(std::span<const std::uint8_t> judged_relevant,
                                std::size_t relevant_total) {
  QueryMetrics m;
  m.retrieved = judged_relevant.size();
  m.relevant_total = relevant_total;
  for (std::uint8_t flag : judged_relevant) m.relevant_retrieved += flag != 0 ? 1 : 0;
  if (m.relevant_retrieved > relevant_total)
    throw std::invalid_argument("more relevant documents retrieved than judged relevant");
  for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i)
    m.p_at[i] = precision_at(judged_relevant, kPrecisionCutoffs[i]);
  if (relevant_total > 0) {
    m.average_precision = average_precision_of(judged_relevant, relevant_total);
    m.curve = curve_of(judged_relevant, relevant_total);
  }
  return m;
}

char outcome_symbol(Outcome outcome) {
  switch (outcome) {
    case Outcome::kImproved: return '+';
    case Outcome::kNotImproved: return '-';
    case Outcome::kNoDecision: return 'X';
  }
  return 'X';
}

Outcome outcome_from_symbol(std::string_view symbol) {
  if (symbol == "+") return Outcome::kImproved;
  if (symbol == "-") return Outcome::kNotImproved;
  if (symbol == "X") return Outcome::kNoDecision;
  throw Error("unknown outcome symbol '" + std::string(symbol) + "'");
}

Outcome classify(const Curve11& before, const Curve11& after) {
  bool all_above = true;
  bool all_below = true;
  for (std::size_t i = 0; i < kCurvePoints; ++i) {
    all_above = all_above && after[i] > before[i];
    all_below = all_below && after[i] < before[i];
  }
  if (all_above) return Outcome::kImproved;
  if (all_below) return Outcome::kNotImproved;
  return Outcome::kNoDecision;
}

std::vector<std::string> metrics_columns() {
  std::vector<std::string> columns = {"qid", "retrieved", "rel_ret"};
  for (std::size_t k : kPrecisionCutoffs) columns.push_back("p" + std::to_string(k));
  columns.push_back("ap");
  for (std::size_t i = 0; i < kCurvePoints; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "r%02zu", i * 10);
    columns.push_back(buf);
  }
  return columns;
}

std::vector<std::string> metrics_fields(const QueryMetrics& m) {
  std::vector<std::string> fields = {std::to_string(m.retrieved),
                                     std::to_string(m.relevant_retrieved)};
  for (double p : m.p_at) fields.push_back(csv::fixed6(p));
  fields.push_back(m.average_precision ? csv::fixed6(*m.average_precision) : "NA");
  for (std::size_t i = 0; i < kCurvePoints; ++i)
    fields.push_back(m.curve ? csv::fixed6((*m.curve)[i]) : "NA");
  return fields;
}

QueryMetrics parse_metrics_fields(std::span<const std::string> fields, std::size_t relevant_total) {
  const std::size_t expected = 2 + kPrecisionCutoffs.size() + 1 + kCurvePoints;
  if (fields.size() != expected)
    throw Error("metrics row has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(expected));
  QueryMetrics m;
  m.relevant_total = relevant_total;
  m.retrieved = parse_count(fields[0]);
  m.relevant_retrieved = parse_count(fields[1]);
  std::size_t f = 2;
  for (double& p : m.p_at) p = parse_double(fields[f++]);
  if (fields[f] != "NA") m.average_precision = parse_double(fields[f]);
  ++f;
  if (fields[f] != "NA") {
    Curve11 curve{};
    for (double& v : curve) v = parse_double(fields[f++]);
    m.curve = curve;
  }
  return m;
}

std::map<std::string, std::vector<std::string>> parse_trec_run(std::istream& in,
                                                               const std::string& source) {
  std::map<std::string, std::vector<std::pair<long, std::string>>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto parts = split_whitespace(line);
    if (parts.empty() || parts[0].front() == '#') continue;
    if (parts.size() != 6)
      throw ParseError(source, number, "expected 'qid Q0 docid rank score tag', got " +
                                           std::to_string(parts.size()) + " fields");
    long rank = 0;
    if (!parse_number(parts[3], rank)) throw ParseError(source, number, "rank is not an integer");
    rows[std::string(parts[0])].emplace_back(rank, std::string(parts[2]));
  }
  std::map<std::string, std::vector<std::string>> run;
  for (auto& [qid, entries] : rows) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& ids = run[qid];
    for (auto& e : entries) ids.push_back(std::move(e.second));
  }
  return run;
}

}  // namespace assocprf
