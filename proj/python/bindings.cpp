#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "assocprf/error.hpp"
#include "assocprf/eval.hpp"
#include "assocprf/index.hpp"
#include "assocprf/prf.hpp"
#include "assocprf/queries.hpp"
#include "assocprf/report.hpp"
#include "assocprf/retrieval.hpp"
#include "assocprf/sweep.hpp"
#include "assocprf/synth.hpp"
#include "assocprf/text_analysis.hpp"

namespace py = pybind11;
using namespace assocprf;

namespace {

InvertedIndex index_from_texts(const std::map<std::string, std::string>& docs,
                               const AnalyzerConfig& config) {
  IndexBuilder builder(config);
  for (const auto& [id, text] : docs) builder.add_text(id, text);
  return std::move(builder).build();
}

std::vector<std::pair<std::string, double>> ranked_pairs(const InvertedIndex& index,
                                                         const RankedList& ranked) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(ranked.size());
  for (const auto& e : ranked.entries) out.emplace_back(index.document(e.doc_id).external_id, e.score);
  return out;
}

// Full matrix as {u: {v: S(u, v)}} over positive cells.
std::map<std::string, std::map<std::string, std::uint64_t>> matrix_dict(
    const InvertedIndex& index, const std::vector<std::string>& feedback_ids) {
  FeedbackSet feedback;
  for (const auto& id : feedback_ids) {
    const auto doc = index.find_document(id);
    if (!doc) throw Error("unknown document " + id);
    feedback.doc_ids.push_back(*doc);
  }
  const AssociationMatrix matrix = association_matrix(index, feedback);
  std::map<std::string, std::map<std::string, std::uint64_t>> out;
  for (TermId u : matrix.rows()) {
    auto& row = out[index.term(u)];
    for (const auto& cell : matrix.row(u)) row[index.term(cell.term)] = cell.score;
  }
  return out;
}

std::map<std::string, QueryMetrics> evaluate_lists(const std::map<std::string, std::vector<std::string>>& run,
                                                   const Qrels& qrels) {
  std::map<std::string, QueryMetrics> out;
  for (const auto& [qid, ranking] : run) out.emplace(qid, evaluate(ranking, qrels.relevant(qid)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Inverted index, association-cluster pseudo-relevance feedback and TREC-style evaluation";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", m.attr("Error"));
  py::register_exception<IndexFormatError>(m, "IndexFormatError", m.attr("Error"));
  py::register_exception<NoExpansionError>(m, "NoExpansionError", m.attr("Error"));

  py::enum_<UnicodeNormalization>(m, "UnicodeNormalization")
      .value("NONE", UnicodeNormalization::kNone)
      .value("NFKC", UnicodeNormalization::kNfkc);

  py::class_<AnalyzerConfig>(m, "AnalyzerConfig")
      .def(py::init<>())
      .def_readwrite("lowercase", &AnalyzerConfig::lowercase)
      .def_readwrite("unicode_normalization", &AnalyzerConfig::unicode_normalization)
      .def_readwrite("arabic_orthographic_folding", &AnalyzerConfig::arabic_orthographic_folding)
      .def_readwrite("stopwords", &AnalyzerConfig::stopwords)
      .def_readwrite("min_token_length", &AnalyzerConfig::min_token_length)
      .def("serialize", &AnalyzerConfig::serialize)
      .def_static("deserialize", &AnalyzerConfig::deserialize)
      .def("fingerprint", &AnalyzerConfig::fingerprint)
      .def(py::self == py::self);

  m.def("tokenize", &tokenize, py::arg("text"), py::arg("config") = AnalyzerConfig{});
  m.def("fold_arabic", &fold_arabic, py::arg("token"));

  py::class_<Document>(m, "Document")
      .def_readonly("doc_id", &Document::doc_id)
      .def_readonly("external_id", &Document::external_id)
      .def_readonly("length", &Document::length);

  py::class_<InvertedIndex>(m, "InvertedIndex")
      .def_property_readonly("doc_count", &InvertedIndex::doc_count)
      .def_property_readonly("term_count", &InvertedIndex::term_count)
      .def_property_readonly("total_tokens", &InvertedIndex::total_tokens)
      .def_property_readonly("analyzer", &InvertedIndex::analyzer)
      .def("documents",
           [](const InvertedIndex& index) {
             return std::vector<Document>(index.documents().begin(), index.documents().end());
           })
      .def("terms",
           [](const InvertedIndex& index) {
             std::vector<std::string> out;
             for (TermId t = 0; t < index.term_count(); ++t) out.push_back(index.term(t));
             return out;
           })
      .def("doc_freq",
           [](const InvertedIndex& index, const std::string& term) -> std::uint32_t {
             const auto id = index.find(term);
             return id ? index.doc_freq(*id) : 0;
           })
      .def("postings",
           [](const InvertedIndex& index, const std::string& term) {
             std::vector<std::pair<std::string, std::uint32_t>> out;
             for (const auto& p : index.postings(std::string_view(term)))
               out.emplace_back(index.document(p.doc_id).external_id, p.term_freq);
             return out;
           })
      .def("__eq__", [](const InvertedIndex& a, const InvertedIndex& b) { return a == b; });

  m.def("index_texts", &index_from_texts, py::arg("documents"), py::arg("config") = AnalyzerConfig{},
        "Index a {external_id: text} mapping.");
  m.def(
      "build_index",
      [](const std::filesystem::path& dir, const AnalyzerConfig& config, unsigned workers) {
        return build_index(dir, config, nullptr, workers);
      },
      py::arg("corpus_dir"), py::arg("config") = AnalyzerConfig{}, py::arg("workers") = 1u);
  m.def("save_index", &save_index, py::arg("index"), py::arg("path"));
  m.def("load_index", &load_index, py::arg("path"));

  py::class_<Query>(m, "Query")
      .def(py::init([](std::string id, std::vector<std::string> tokens) { return Query(std::move(id), tokens); }),
           py::arg("id"), py::arg("terms"))
      .def_static("parse", &Query::parse, py::arg("id"), py::arg("text"), py::arg("config"))
      .def_property_readonly("id", &Query::id)
      .def_property_readonly("terms", &Query::terms)
      .def("__len__", &Query::size);

  m.def("idf", &idf, py::arg("index"), py::arg("term"));
  m.def(
      "score",
      [](const InvertedIndex& index, const Query& query, const std::string& external_id) {
        const auto doc = index.find_document(external_id);
        if (!doc) throw Error("unknown document " + external_id);
        return score(index, query, *doc);
      },
      py::arg("index"), py::arg("query"), py::arg("external_id"));
  m.def(
      "search",
      [](const InvertedIndex& index, const Query& query, std::size_t k) {
        return ranked_pairs(index, search(index, query, k));
      },
      py::arg("index"), py::arg("query"), py::arg("k") = 1000,
      "Ranked (external_id, score) pairs, best first.");

  m.def("association_matrix", &matrix_dict, py::arg("index"), py::arg("feedback_ids"),
        "Positive cells of S(u, v) over the given feedback documents as {u: {v: S}}.");

  py::class_<PrfParams>(m, "PrfParams")
      .def(py::init([](std::size_t d, std::size_t t) { return PrfParams{d, t}; }), py::arg("feedback_docs"),
           py::arg("expansion_terms"))
      .def_readwrite("feedback_docs", &PrfParams::feedback_docs)
      .def_readwrite("expansion_terms", &PrfParams::expansion_terms);

  py::class_<TermCluster>(m, "TermCluster")
      .def_readonly("source", &TermCluster::source)
      .def_readonly("members", &TermCluster::members);

  py::class_<Expansion>(m, "Expansion")
      .def_readonly("query", &Expansion::query)
      .def_readonly("clusters", &Expansion::clusters)
      .def_readonly("added", &Expansion::added)
      .def_readonly("feedback_empty", &Expansion::feedback_empty);

  m.def(
      "expand",
      [](const InvertedIndex& index, const Query& query, const PrfParams& params) {
        params.validate();
        const RankedList initial = search(index, query, std::max<std::size_t>(params.feedback_docs, 1));
        return pseudo_relevance_feedback(index, query, initial, params);
      },
      py::arg("index"), py::arg("query"), py::arg("params"),
      "Initial run, top-D sampling and association-cluster expansion.");

  py::class_<Qrels>(m, "Qrels")
      .def(py::init<>())
      .def("add", &Qrels::add, py::arg("qid"), py::arg("external_id"), py::arg("relevant"))
      .def("relevant",
           [](const Qrels& q, const std::string& qid) {
             const auto& set = q.relevant(qid);
             return std::set<std::string>(set.begin(), set.end());
           })
      .def("__contains__", [](const Qrels& q, const std::string& qid) { return q.contains(qid); })
      .def("__len__", &Qrels::query_count);
  m.def("parse_qrels", py::overload_cast<const std::filesystem::path&>(&parse_qrels), py::arg("path"));

  py::class_<QueryMetrics>(m, "QueryMetrics")
      .def_readonly("retrieved", &QueryMetrics::retrieved)
      .def_readonly("relevant_retrieved", &QueryMetrics::relevant_retrieved)
      .def_readonly("relevant_total", &QueryMetrics::relevant_total)
      .def_property_readonly("precision",
                             [](const QueryMetrics& q) {
                               std::map<std::size_t, double> out;
                               for (std::size_t c : kPrecisionCutoffs) out[c] = q.precision_at(c);
                               return out;
                             })
      .def_readonly("average_precision", &QueryMetrics::average_precision)
      .def_readonly("curve", &QueryMetrics::curve);

  m.def(
      "evaluate",
      [](const std::vector<std::string>& ranking, const std::set<std::string>& relevant) {
        return evaluate(ranking, RelevantSet(relevant.begin(), relevant.end()));
      },
      py::arg("ranking"), py::arg("relevant"));
  m.def("evaluate_run", &evaluate_lists, py::arg("run"), py::arg("qrels"),
        "Metrics per query for a {qid: [external_id, ...]} run.");
  m.def(
      "classify",
      [](const Curve11& before, const Curve11& after) { return std::string(1, outcome_symbol(classify(before, after))); },
      py::arg("before"), py::arg("after"), "'+', '-' or 'X'.");

  py::class_<QueryResult>(m, "QueryResult")
      .def_readonly("qid", &QueryResult::qid)
      .def_readonly("before", &QueryResult::before)
      .def_readonly("after", &QueryResult::after)
      .def_property_readonly("outcome", [](const QueryResult& r) { return std::string(1, outcome_symbol(r.outcome)); })
      .def_readonly("before_terms", &QueryResult::before_terms)
      .def_readonly("after_terms", &QueryResult::after_terms)
      .def_readonly("after_flags", &QueryResult::after_flags);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("feedback_docs", &RunResult::feedback_docs)
      .def_readonly("expansion_terms", &RunResult::expansion_terms)
      .def_readonly("queries", &RunResult::queries)
      .def("to_csv", &format_run_csv);

  m.def(
      "run_combination",
      [](const InvertedIndex& index, const std::map<std::string, std::string>& queries, const Qrels& qrels,
         std::size_t d, std::size_t t, std::size_t depth) {
        std::vector<QueryText> raw;
        for (const auto& [qid, text] : queries) raw.push_back({qid, text});
        return run_combination(index, analyze_queries(raw, index.analyzer()), qrels, d, t, depth);
      },
      py::arg("index"), py::arg("queries"), py::arg("qrels"), py::arg("feedback_docs"), py::arg("expansion_terms"),
      py::arg("depth") = 1000);

  m.def(
      "run_sweep",
      [](const std::filesystem::path& index_path, const std::filesystem::path& queries_path,
         const std::filesystem::path& qrels_path, const std::filesystem::path& out_dir, const std::string& d_range,
         const std::string& t_range, std::size_t depth, unsigned workers, bool resume, bool traces) {
        SweepConfig config;
        config.index_path = index_path;
        config.queries_path = queries_path;
        config.qrels_path = qrels_path;
        config.out_dir = out_dir;
        config.d_range = IntRange::parse(d_range);
        config.t_range = IntRange::parse(t_range);
        config.depth = depth;
        config.workers = workers;
        config.resume = resume;
        config.write_traces = traces;
        config.validate();
        SweepSummary summary;
        {
          py::gil_scoped_release release;
          summary = run_sweep(config);
        }
        return py::dict(py::arg("executed") = summary.executed, py::arg("skipped") = summary.skipped,
                        py::arg("failed") = summary.failed);
      },
      py::arg("index"), py::arg("queries"), py::arg("qrels"), py::arg("out_dir"), py::arg("d_range") = "1:20",
      py::arg("t_range") = "1:20", py::arg("depth") = 1000, py::arg("workers") = 1u, py::arg("resume") = false,
      py::arg("traces") = false);

  m.def(
      "report",
      [](const std::filesystem::path& sweep_dir, const std::filesystem::path& out_dir, const std::string& format) {
        if (format != "csv" && format != "markdown" && format != "both")
          throw std::invalid_argument("format must be csv, markdown or both");
        const ReportFormat f = format == "csv"        ? ReportFormat::kCsv
                               : format == "markdown" ? ReportFormat::kMarkdown
                                                      : ReportFormat::kBoth;
        const auto runs = load_sweep(sweep_dir);
        return write_report(aggregate(runs), out_dir, f);
      },
      py::arg("sweep_dir"), py::arg("out_dir"), py::arg("format") = "both",
      "Aggregates a sweep directory and writes the tables. Returns the written paths.");

  m.def(
      "generate_synthetic",
      [](const std::filesystem::path& out_dir, std::size_t documents, std::size_t queries, std::size_t planted,
         std::uint64_t seed) {
        SynthConfig config;
        config.documents = documents;
        config.queries = queries;
        config.planted = planted;
        config.seed = seed;
        write_synthetic(generate_synthetic(config), out_dir);
      },
      py::arg("out_dir"), py::arg("documents") = 2000, py::arg("queries") = 50, py::arg("planted") = 20,
      py::arg("seed") = SynthConfig{}.seed,
      "Writes corpus/*.txt, queries.tsv, qrels.txt and planted.tsv under out_dir.");
}
