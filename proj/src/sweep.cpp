#include "assocprf/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "assocprf/csv.hpp"
#include "assocprf/error.hpp"
#include "assocprf/fileio.hpp"
#include "assocprf/queries.hpp"

namespace assocprf {
namespace {

std::string join(const std::vector<std::string>& parts, char separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_nonempty(std::string_view text, char separator) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(separator, pos);
    if (end == std::string_view::npos) end = text.size();
    if (end > pos) parts.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

std::size_t to_size(std::string_view text, const std::string& what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw Error("bad " + what + ": '" + std::string(text) + "'");
  return value;
}

double to_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  try {
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw Error("bad " + what + ": '" + text + "'");
}

std::vector<std::string> run_columns() {
  std::vector<std::string> columns = {"qid", "stage", "relevant"};
  const auto metrics = metrics_columns();
  columns.insert(columns.end(), metrics.begin() + 1, metrics.end());
  columns.insert(columns.end(), {"outcome", "flags", "terms"});
  return columns;
}

std::vector<std::string> manifest_columns() {
  return {"D",  "T",     "file",       "status",    "crc32",     "queries",  "judged", "plus",
          "minus", "x", "map_before", "map_after", "p5_before", "p5_after", "message"};
}

std::string two_digits(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

}  // namespace

IntRange IntRange::parse(std::string_view text) {
  IntRange range;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    range.lo = range.hi = to_size(text, "range");
  } else {
    range.lo = to_size(text.substr(0, colon), "range start");
    range.hi = to_size(text.substr(colon + 1), "range end");
  }
  if (range.lo > range.hi) throw std::invalid_argument("empty range '" + std::string(text) + "'");
  return range;
}

RunAggregates RunResult::aggregates() const {
  RunAggregates a;
  a.queries = queries.size();
  for (const auto& q : queries) {
    switch (q.outcome) {
      case Outcome::kImproved: ++a.improved; break;
      case Outcome::kNotImproved: ++a.not_improved; break;
      case Outcome::kNoDecision: ++a.no_decision; break;
    }
    if (!q.before.judged()) continue;
    ++a.judged;
    a.map_before += q.before.average_precision.value_or(0.0);
    a.map_after += q.after.average_precision.value_or(0.0);
    for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i) {
      a.p_before[i] += q.before.p_at[i];
      a.p_after[i] += q.after.p_at[i];
    }
  }
  if (a.judged > 0) {
    const auto n = static_cast<double>(a.judged);
    a.map_before /= n;
    a.map_after /= n;
    for (std::size_t i = 0; i < kPrecisionCutoffs.size(); ++i) {
      a.p_before[i] /= n;
      a.p_after[i] /= n;
    }
  }
  return a;
}

// --------------------------------------------------------------------------
// Experiment

Experiment::Experiment(const InvertedIndex& index, std::vector<Query> queries, const Qrels& qrels,
                       std::size_t depth)
    : index_(&index), queries_(std::move(queries)), depth_(depth) {
  if (depth_ == 0) throw Error("retrieval depth must be >= 1");
  relevant_docs_.reserve(queries_.size());
  for (const auto& query : queries_) {
    if (!qrels.contains(query.id())) throw Error("query " + query.id() + " has no qrels entry");
    const auto& relevant = qrels.relevant(query.id());
    std::vector<std::uint8_t> flags(index.doc_count(), 0);
    for (const auto& external_id : relevant) {
      if (auto doc = index.find_document(external_id)) flags[*doc] = 1;
    }
    relevant_docs_.push_back(std::move(flags));
    relevant_totals_.push_back(relevant.size());
  }
  baselines_.reserve(queries_.size());
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    Baseline baseline;
    if (queries_[q].empty()) {
      baseline.flags.emplace_back(kFlagEmptyQuery);
    } else {
      baseline.ranking = search(index, queries_[q], depth_);
    }
    if (baseline.ranking.empty()) baseline.flags.emplace_back(kFlagNoInitialResults);
    if (relevant_totals_[q] == 0) baseline.flags.emplace_back(kFlagNoRelevant);
    baseline.metrics = measure(q, baseline.ranking);
    baselines_.push_back(std::move(baseline));
  }
}

QueryMetrics Experiment::measure(std::size_t query, const RankedList& ranking) const {
  std::vector<std::uint8_t> judged(ranking.size());
  const auto& relevant = relevant_docs_[query];
  for (std::size_t i = 0; i < ranking.size(); ++i) judged[i] = relevant[ranking.entries[i].doc_id];
  return evaluate_judgments(judged, relevant_totals_[query]);
}

RunResult Experiment::run(const PrfParams& params, std::ostream* trace) const {
  if (params.feedback_docs == 0 || params.expansion_terms == 0)
    throw std::invalid_argument("D and T must be >= 1");
  RunResult result;
  result.feedback_docs = params.feedback_docs;
  result.expansion_terms = params.expansion_terms;
  result.queries.reserve(queries_.size());
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    const Query& query = queries_[q];
    const Baseline& baseline = baselines_[q];
    QueryResult row;
    row.qid = query.id();
    row.before = baseline.metrics;
    row.before_terms = query.terms();
    row.before_flags = baseline.flags;

    const Expansion expansion = pseudo_relevance_feedback(*index_, query, baseline.ranking, params);
    if (expansion.feedback_empty) {
      row.after = baseline.metrics;
      row.after_flags.emplace_back(kFlagNoInitialResults);
    } else if (expansion.added.empty()) {
      // q_new == q, so the second run is the first one.
      row.after = baseline.metrics;
      row.after_flags.emplace_back(kFlagNotExpanded);
    } else {
      row.after = measure(q, search(*index_, expansion.query, depth_));
    }
    row.after_terms = expansion.query.terms();

    if (row.before.curve && row.after.curve) {
      row.outcome = classify(*row.before.curve, *row.after.curve);
    } else {
      row.outcome = Outcome::kNoDecision;
      row.after_flags.emplace_back(kFlagNoRelevant);
    }
    if (trace) write_trace_row(*trace, *index_, query, params, expansion);
    result.queries.push_back(std::move(row));
  }
  return result;
}

RunResult run_combination(const InvertedIndex& index, const std::vector<Query>& queries,
                          const Qrels& qrels, std::size_t feedback_docs,
                          std::size_t expansion_terms, std::size_t depth) {
  const Experiment experiment(index, queries, qrels, depth);
  return experiment.run({feedback_docs, expansion_terms});
}

// --------------------------------------------------------------------------
// Run files

std::string run_file_name(std::size_t feedback_docs, std::size_t expansion_terms) {
  return "run_D" + two_digits(feedback_docs) + "_T" + two_digits(expansion_terms) + ".csv";
}

std::string trace_file_name(std::size_t feedback_docs, std::size_t expansion_terms) {
  return "trace_D" + two_digits(feedback_docs) + "_T" + two_digits(expansion_terms) + ".csv";
}

std::string format_run_csv(const RunResult& result) {
  std::string out = csv::join(run_columns()) + "\n";
  for (const auto& q : result.queries) {
    auto row = [&](std::string_view stage, const QueryMetrics& m, const std::string& outcome,
                   const std::vector<std::string>& flags, const std::vector<std::string>& terms) {
      std::vector<std::string> fields = {q.qid, std::string(stage), std::to_string(m.relevant_total)};
      const auto metrics = metrics_fields(m);
      fields.insert(fields.end(), metrics.begin(), metrics.end());
      fields.push_back(outcome);
      fields.push_back(join(flags, '|'));
      fields.push_back(join(terms, ' '));
      out += csv::join(fields);
      out += '\n';
    };
    row("before", q.before, "", q.before_flags, q.before_terms);
    row("after", q.after, std::string(1, outcome_symbol(q.outcome)), q.after_flags, q.after_terms);
  }
  return out;
}

RunResult parse_run_csv(std::string_view text, std::size_t feedback_docs,
                        std::size_t expansion_terms, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || csv::split(lines[0]) != run_columns())
    throw ParseError(source, 1, "unexpected run file header");
  const std::size_t columns = run_columns().size();
  const std::size_t metric_count = metrics_columns().size() - 1;

  RunResult result;
  result.feedback_docs = feedback_docs;
  result.expansion_terms = expansion_terms;
  std::optional<QueryResult> pending;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = csv::split(lines[n]);
    if (fields.size() != columns)
      throw ParseError(source, n + 1, "expected " + std::to_string(columns) + " fields");
    try {
      const std::size_t relevant = to_size(fields[2], "relevant count");
      const QueryMetrics metrics =
          parse_metrics_fields(std::span(fields).subspan(3, metric_count), relevant);
      const auto& outcome = fields[3 + metric_count];
      auto flags = split_nonempty(fields[4 + metric_count], '|');
      auto terms = split_nonempty(fields[5 + metric_count], ' ');
      if (fields[1] == "before") {
        if (pending) throw Error("before row without a matching after row");
        pending.emplace();
        pending->qid = fields[0];
        pending->before = metrics;
        pending->before_flags = std::move(flags);
        pending->before_terms = std::move(terms);
      } else if (fields[1] == "after") {
        if (!pending || pending->qid != fields[0]) throw Error("after row without a before row");
        pending->after = metrics;
        pending->outcome = outcome_from_symbol(outcome);
        pending->after_flags = std::move(flags);
        pending->after_terms = std::move(terms);
        result.queries.push_back(std::move(*pending));
        pending.reset();
      } else {
        throw Error("unknown stage '" + fields[1] + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, n + 1, e.what());
    }
  }
  if (pending) throw ParseError(source, lines.size(), "missing after row for " + pending->qid);
  return result;
}

// --------------------------------------------------------------------------
// Manifest

std::string format_manifest(std::vector<ManifestEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    return std::tie(a.feedback_docs, a.expansion_terms) < std::tie(b.feedback_docs, b.expansion_terms);
  });
  std::string out = csv::join(manifest_columns()) + "\n";
  for (const auto& e : entries) {
    const auto& a = e.aggregates;
    out += csv::join({std::to_string(e.feedback_docs), std::to_string(e.expansion_terms), e.file,
                      e.status, e.crc32, std::to_string(a.queries), std::to_string(a.judged),
                      std::to_string(a.improved), std::to_string(a.not_improved),
                      std::to_string(a.no_decision), csv::fixed6(a.map_before),
                      csv::fixed6(a.map_after), csv::fixed6(a.p_before[0]),
                      csv::fixed6(a.p_after[0]), e.message});
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || csv::split(lines[0]) != manifest_columns())
    throw ParseError(source, 1, "unexpected manifest header");
  std::vector<ManifestEntry> entries;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = csv::split(lines[n]);
    if (f.size() != manifest_columns().size())
      throw ParseError(source, n + 1, "expected " + std::to_string(manifest_columns().size()) + " fields");
    try {
      ManifestEntry e;
      e.feedback_docs = to_size(f[0], "D");
      e.expansion_terms = to_size(f[1], "T");
      e.file = f[2];
      e.status = f[3];
      e.crc32 = f[4];
      e.aggregates.queries = to_size(f[5], "query count");
      e.aggregates.judged = to_size(f[6], "judged count");
      e.aggregates.improved = to_size(f[7], "plus count");
      e.aggregates.not_improved = to_size(f[8], "minus count");
      e.aggregates.no_decision = to_size(f[9], "x count");
      e.aggregates.map_before = to_double(f[10], "map_before");
      e.aggregates.map_after = to_double(f[11], "map_after");
      e.aggregates.p_before[0] = to_double(f[12], "p5_before");
      e.aggregates.p_after[0] = to_double(f[13], "p5_after");
      e.message = f[14];
      entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ParseError(source, n + 1, ex.what());
    }
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  return parse_manifest(read_file_text(path), path.string());
}

// --------------------------------------------------------------------------
// Sweep

void SweepConfig::validate() const {
  for (const auto* range : {&d_range, &t_range}) {
    if (range->size() == 0) throw std::invalid_argument("empty parameter range");
    if (range->lo < 1 || range->hi > param_upper_bound)
      throw std::invalid_argument("parameter range must lie within [1, " +
                                  std::to_string(param_upper_bound) + "]");
  }
  if (depth < kPrecisionCutoffs.back())
    throw std::invalid_argument("retrieval depth must be >= " +
                                std::to_string(kPrecisionCutoffs.back()));
  if (workers == 0) throw std::invalid_argument("worker count must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("output directory required");
}

SweepSummary run_sweep(const SweepConfig& config, const SweepProgress& progress) {
  config.validate();
  const InvertedIndex index = load_index(config.index_path);
  const Qrels qrels = parse_qrels(config.qrels_path);
  auto queries = analyze_queries(parse_queries(config.queries_path), index.analyzer());
  if (queries.empty()) throw Error("query file has no queries: " + config.queries_path.string());
  const Experiment experiment(index, std::move(queries), qrels, config.depth);
  return run_sweep(config, experiment, progress);
}

SweepSummary run_sweep(const SweepConfig& config, const Experiment& experiment,
                       const SweepProgress& progress) {
  namespace fs = std::filesystem;
  config.validate();
  fs::create_directories(config.out_dir);

  using Key = std::pair<std::size_t, std::size_t>;
  std::map<Key, ManifestEntry> previous;
  if (config.resume && fs::exists(config.out_dir / kManifestName)) {
    for (auto& e : read_manifest(config.out_dir)) previous[{e.feedback_docs, e.expansion_terms}] = e;
  }

  SweepSummary summary;
  std::map<Key, ManifestEntry> entries;
  std::vector<Key> pending;
  for (std::size_t d = config.d_range.lo; d <= config.d_range.hi; ++d) {
    for (std::size_t t = config.t_range.lo; t <= config.t_range.hi; ++t) {
      const Key key{d, t};
      auto it = previous.find(key);
      if (it != previous.end() && it->second.ok()) {
        const fs::path file = config.out_dir / it->second.file;
        std::error_code ec;
        if (fs::is_regular_file(file, ec) &&
            crc32_hex(crc32(std::span<const std::uint8_t>(read_file_bytes(file)))) == it->second.crc32) {
          entries[key] = it->second;
          ++summary.skipped;
          continue;
        }
      }
      pending.push_back(key);
    }
  }

  std::mutex mutex;
  const std::size_t total = pending.size();
  std::size_t done = 0;
  auto write_manifest = [&] {
    std::vector<ManifestEntry> all;
    for (const auto& [key, e] : entries) all.push_back(e);
    write_file_atomic(config.out_dir / kManifestName, format_manifest(std::move(all)));
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const auto [d, t] = pending[i];
      ManifestEntry entry;
      entry.feedback_docs = d;
      entry.expansion_terms = t;
      entry.file = run_file_name(d, t);
      try {
        std::ostringstream trace;
        if (config.write_traces) write_trace_header(trace);
        const RunResult result = experiment.run({d, t}, config.write_traces ? &trace : nullptr);
        const std::string text = format_run_csv(result);
        write_file_atomic(config.out_dir / entry.file, text);
        if (config.write_traces) write_file_atomic(config.out_dir / trace_file_name(d, t), trace.str());
        entry.status = "ok";
        entry.crc32 = crc32_hex(crc32(text));
        entry.aggregates = result.aggregates();
      } catch (const std::exception& e) {
        entry.status = "failed";
        entry.message = e.what();
      }
      std::lock_guard lock(mutex);
      if (entry.ok()) ++summary.executed;
      else ++summary.failed;
      entries[{d, t}] = entry;
      ++done;
      try {
        write_manifest();
        if (progress) progress(entry, done, total);
      } catch (...) {
        if (!fatal) fatal = std::current_exception();
        next = pending.size();
        return;
      }
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(config.workers, pending.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  write_manifest();
  for (const auto& [key, e] : entries) summary.manifest.push_back(e);
  return summary;
}

}  // namespace assocprf
