#include "assocprf/queries.hpp"

#include <fstream>
#include <istream>
#include <set>

#include "assocprf/error.hpp"

namespace assocprf {

std::vector<QueryText> parse_queries(std::istream& in, const std::string& source) {
  std::vector<QueryText> queries;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, number, "expected 'qid<TAB>text'");
    std::string id = line.substr(0, tab);
    if (id.empty()) throw ParseError(source, number, "empty query id");
    if (!seen.insert(id).second) throw ParseError(source, number, "duplicate query id " + id);
    queries.push_back({std::move(id), line.substr(tab + 1)});
  }
  if (in.bad()) throw IoError("read failed: " + source);
  return queries;
}

std::vector<QueryText> parse_queries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read query file: " + path.string());
  return parse_queries(in, path.string());
}

std::vector<Query> analyze_queries(const std::vector<QueryText>& raw, const AnalyzerConfig& config) {
  std::vector<Query> queries;
  queries.reserve(raw.size());
  for (const auto& q : raw) queries.push_back(Query::parse(q.id, q.text, config));
  return queries;
}

}  // namespace assocprf
