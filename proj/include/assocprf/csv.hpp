#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace assocprf::csv {

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Splits one CSV record. Quoted fields may contain commas and doubled quotes,
/// but not newlines (none of our writers emit them).
std::vector<std::string> split(std::string_view line);

std::string join(const std::vector<std::string>& fields);

/// Fixed six-decimal rendering used by every metrics file.
std::string fixed6(double value);

}  // namespace assocprf::csv
