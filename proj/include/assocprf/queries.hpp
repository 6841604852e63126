#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "assocprf/retrieval.hpp"

namespace assocprf {

struct QueryText {
  std::string id;
  std::string text;
};

/// Query file: UTF-8 TSV `qid<TAB>query text`; blank lines and lines starting
/// with '#' are skipped. Throws ParseError on a line without a tab, an empty
/// qid, or a repeated qid.
std::vector<QueryText> parse_queries(std::istream& in, const std::string& source = "<queries>");
std::vector<QueryText> parse_queries(const std::filesystem::path& path);

std::vector<Query> analyze_queries(const std::vector<QueryText>& raw, const AnalyzerConfig& config);

}  // namespace assocprf
