// assocprf command-line tool: index, search, sweep, report, eval, gen-synth.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "assocprf/csv.hpp"
#include "assocprf/error.hpp"
#include "assocprf/eval.hpp"
#include "assocprf/fileio.hpp"
#include "assocprf/index.hpp"
#include "assocprf/prf.hpp"
#include "assocprf/report.hpp"
#include "assocprf/retrieval.hpp"
#include "assocprf/sweep.hpp"
#include "assocprf/synth.hpp"
#include "assocprf/text_analysis.hpp"

namespace fs = std::filesystem;
using namespace assocprf;

namespace {

struct IndexArgs {
  std::string corpus_dir;
  std::string out_index;
  bool no_lowercase = false;
  std::string normalization = "nfkc";
  bool fold_arabic = false;
  std::string stopwords;
  std::size_t min_length = 1;
  unsigned workers = 1;
};

struct SearchArgs {
  std::string index;
  std::string query;
  std::size_t k = 10;
  std::string prf;
  std::string qid = "query";
  std::string tag = "assocprf";
};

struct SweepArgs {
  std::string index;
  std::string queries;
  std::string qrels;
  std::string out;
  std::string d_range = "1:20";
  std::string t_range = "1:20";
  std::size_t k = 1000;
  unsigned workers = 1;
  bool resume = false;
  bool trace = false;
};

struct ReportArgs {
  std::string sweep_dir;
  std::string out_dir;
  std::string format = "both";
};

struct EvalArgs {
  std::string run;
  std::string qrels;
  std::string out;
};

struct SynthArgs {
  std::string out_dir;
  SynthConfig config;
};

// Flat key=value file; keys are long option names without the dashes.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, number, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(path, number, "empty key");
    entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return entries;
}

// Appends `--key=value` for every config entry whose flag is not already on
// the command line, so flags override the file and the file overrides defaults.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--") break;
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path) return args;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config_file(*config_path)) {
    if (key == "config") throw Error("config file cannot name another config file");
    if (!given(key)) extra.push_back("--" + key + "=" + value);
  }
  // Inserted before any "--" so they are still read as options.
  auto end = std::find(args.begin(), args.end(), std::string("--"));
  args.insert(end, extra.begin(), extra.end());
  return args;
}

void add_config_option(CLI::App* app) {
  app->add_option("--config", "Flat key=value file; keys are long option names, flags on the "
                              "command line take precedence")
      ->check(CLI::ExistingFile);
}

PrfParams parse_prf(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("--prf expects D,T");
  PrfParams params;
  std::size_t used = 0;
  const std::string d = text.substr(0, comma);
  const std::string t = text.substr(comma + 1);
  params.feedback_docs = std::stoul(d, &used);
  if (used != d.size()) throw std::invalid_argument("--prf expects D,T");
  params.expansion_terms = std::stoul(t, &used);
  if (used != t.size()) throw std::invalid_argument("--prf expects D,T");
  params.validate();
  return params;
}

int cmd_index(const IndexArgs& args) {
  AnalyzerConfig config;
  config.lowercase = !args.no_lowercase;
  config.unicode_normalization =
      args.normalization == "none" ? UnicodeNormalization::kNone : UnicodeNormalization::kNfkc;
  config.arabic_orthographic_folding = args.fold_arabic;
  config.min_token_length = args.min_length;
  if (!args.stopwords.empty()) config.stopwords = load_stopwords(args.stopwords, config);

  BuildReport report;
  const InvertedIndex index = build_index(args.corpus_dir, config, &report, args.workers);
  for (const auto& e : report.file_errors)
    std::cerr << "warning: skipped " << e.external_id << ": " << e.message << "\n";
  save_index(index, args.out_index);
  std::cout << "documents=" << index.doc_count() << "\n"
            << "words=" << index.total_tokens() << "\n"
            << "distinct_terms=" << index.term_count() << "\n";
  return 0;
}

int cmd_search(const SearchArgs& args) {
  const InvertedIndex index = load_index(args.index);
  const Query query = Query::parse(args.qid, args.query, index.analyzer());
  if (args.prf.empty()) {
    write_trec_run(std::cout, index, args.qid, search(index, query, args.k), args.tag);
    return 0;
  }
  const PrfParams params = parse_prf(args.prf);
  const RankedList initial = search(index, query, std::max(args.k, params.feedback_docs));
  const Expansion expansion = pseudo_relevance_feedback(index, query, initial, params);

  auto join = [](const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
  };
  std::vector<std::string> feedback;
  for (DocId d : expansion.feedback) feedback.push_back(index.document(d).external_id);
  std::cout << "# original: " << join(query.terms(), " ") << "\n";
  std::cout << "# feedback: " << (feedback.empty() ? "(none)" : join(feedback, " ")) << "\n";
  for (const auto& cluster : expansion.clusters) {
    std::cout << "# cluster " << cluster.source << " ->";
    for (const auto& [term, s] : cluster.members) std::cout << " " << term << ":" << s;
    std::cout << "\n";
  }
  std::cout << "# added: " << (expansion.added.empty() ? "(none)" : join(expansion.added, " ")) << "\n";
  std::cout << "# expanded: " << join(expansion.query.terms(), " ") << "\n";
  write_trec_run(std::cout, index, args.qid, search(index, expansion.query, args.k), args.tag);
  return 0;
}

int cmd_sweep(const SweepArgs& args) {
  SweepConfig config;
  config.index_path = args.index;
  config.queries_path = args.queries;
  config.qrels_path = args.qrels;
  config.out_dir = args.out;
  config.d_range = IntRange::parse(args.d_range);
  config.t_range = IntRange::parse(args.t_range);
  config.depth = args.k;
  config.workers = args.workers;
  config.resume = args.resume;
  config.write_traces = args.trace;
  config.validate();

  const auto summary = run_sweep(config, [](const ManifestEntry& cell, std::size_t done, std::size_t total) {
    char line[160];
    std::snprintf(line, sizeof line, "[%zu/%zu] D=%zu T=%zu %s", done, total, cell.feedback_docs,
                  cell.expansion_terms, cell.status.c_str());
    std::cerr << line;
    if (!cell.ok()) std::cerr << ": " << cell.message;
    std::cerr << "\n";
  });
  std::cout << summary.executed << " cells executed";
  if (summary.skipped > 0) std::cout << ", " << summary.skipped << " already complete";
  if (summary.failed > 0) std::cout << ", " << summary.failed << " failed";
  std::cout << "\n";
  return summary.failed > 0 ? 1 : 0;
}

int cmd_report(const ReportArgs& args) {
  const auto runs = load_sweep(args.sweep_dir);
  const SweepReport report = aggregate(runs);
  const ReportFormat format = args.format == "csv"        ? ReportFormat::kCsv
                              : args.format == "markdown" ? ReportFormat::kMarkdown
                                                          : ReportFormat::kBoth;
  for (const auto& path : write_report(report, args.out_dir, format))
    std::cout << path.generic_string() << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  std::ifstream in(args.run);
  if (!in) throw IoError("cannot read " + args.run);
  const auto run = parse_trec_run(in, args.run);
  const Qrels qrels = parse_qrels(fs::path(args.qrels));

  std::ostringstream out;
  const auto columns = metrics_columns();
  out << csv::join(columns) << "\n";
  for (const auto& [qid, ranking] : run) {
    const RelevantSet& relevant = qrels.relevant(qid);
    std::vector<std::string> fields{qid};
    for (auto& f : metrics_fields(evaluate(ranking, relevant))) fields.push_back(std::move(f));
    out << csv::join(fields) << "\n";
  }
  if (args.out.empty()) {
    std::cout << out.str();
  } else {
    write_file_atomic(args.out, out.str());
  }
  return 0;
}

int cmd_gen_synth(const SynthArgs& args) {
  const SynthCorpus corpus = generate_synthetic(args.config);
  write_synthetic(corpus, args.out_dir);
  std::cout << "documents=" << corpus.documents.size() << "\n"
            << "queries=" << corpus.queries.size() << "\n"
            << "planted=" << corpus.planted.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Association-cluster pseudo-relevance feedback experiments", "assocprf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "assocprf 0.1.0");

  IndexArgs index_args;
  auto* index_cmd = app.add_subcommand("index", "Build an index from a directory of .txt files");
  index_cmd->add_option("corpus_dir", index_args.corpus_dir, "Corpus directory")->required();
  index_cmd->add_option("out_index", index_args.out_index, "Index file to write")->required();
  index_cmd->add_flag("--no-lowercase", index_args.no_lowercase, "Keep letter case");
  index_cmd->add_option("--normalization", index_args.normalization, "Unicode normalization")
      ->check(CLI::IsMember({"none", "nfkc"}))
      ->capture_default_str();
  index_cmd->add_flag("--fold-arabic", index_args.fold_arabic,
                      "Fold alef variants, final ta marbuta and alef maqsura; strip harakat");
  index_cmd->add_option("--stopwords", index_args.stopwords, "Stopword file, one token per line")
      ->check(CLI::ExistingFile);
  index_cmd->add_option("--min-length", index_args.min_length, "Minimum token length in code points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  index_cmd->add_option("--workers", index_args.workers, "Tokenizer threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_config_option(index_cmd);

  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "Run one query; print TREC run lines");
  search_cmd->add_option("index", search_args.index, "Index file")->required();
  search_cmd->add_option("query", search_args.query, "Query text")->required();
  search_cmd->add_option("--k", search_args.k, "Depth of the printed ranking")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  search_cmd->add_option("--prf", search_args.prf, "Expand with D feedback documents and T terms, as D,T");
  search_cmd->add_option("--qid", search_args.qid, "Query id for the run lines")->capture_default_str();
  search_cmd->add_option("--tag", search_args.tag, "Run tag for the run lines")->capture_default_str();
  add_config_option(search_cmd);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (D, T) cell and write run files plus a manifest");
  sweep_cmd->add_option("--index", sweep_args.index, "Index file")->required();
  sweep_cmd->add_option("--queries", sweep_args.queries, "Queries TSV: qid<TAB>text")->required();
  sweep_cmd->add_option("--qrels", sweep_args.qrels, "TREC qrels")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Output directory")->required();
  sweep_cmd->add_option("--d-range", sweep_args.d_range, "Feedback documents, lo:hi")->capture_default_str();
  sweep_cmd->add_option("--t-range", sweep_args.t_range, "Expansion terms per query term, lo:hi")
      ->capture_default_str();
  sweep_cmd->add_option("--k", sweep_args.k, "Retrieval depth of both runs")->capture_default_str();
  sweep_cmd->add_option("--workers", sweep_args.workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_flag("--resume", sweep_args.resume, "Skip cells already complete in the manifest");
  sweep_cmd->add_flag("--trace", sweep_args.trace, "Write an expansion trace per cell");
  add_config_option(sweep_cmd);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a sweep into tables");
  report_cmd->add_option("sweep_dir", report_args.sweep_dir, "Sweep output directory")->required();
  report_cmd->add_option("out_dir", report_args.out_dir, "Report directory")->required();
  report_cmd->add_option("--format", report_args.format, "Output format")
      ->check(CLI::IsMember({"csv", "markdown", "both"}))
      ->capture_default_str();
  add_config_option(report_cmd);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Per-query metrics of a TREC run file");
  eval_cmd->add_option("run", eval_args.run, "TREC run file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("qrels", eval_args.qrels, "TREC qrels")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_args.out, "Write the CSV here instead of stdout");
  add_config_option(eval_cmd);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Write a synthetic corpus with queries, qrels and planted terms");
  synth_cmd->add_option("out_dir", synth_args.out_dir, "Output directory")->required();
  synth_cmd->add_option("--docs", synth_args.config.documents, "Documents")->capture_default_str();
  synth_cmd->add_option("--queries", synth_args.config.queries, "Queries")->capture_default_str();
  synth_cmd->add_option("--planted", synth_args.config.planted, "Queries with a planted expansion term")
      ->capture_default_str();
  synth_cmd->add_option("--vocabulary", synth_args.config.vocabulary, "Background vocabulary size")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.config.seed, "Random seed")->capture_default_str();
  add_config_option(synth_cmd);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*index_cmd) return cmd_index(index_args);
    if (*search_cmd) return cmd_search(search_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args);
    if (*report_cmd) return cmd_report(report_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*synth_cmd) return cmd_gen_synth(synth_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
