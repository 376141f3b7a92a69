#pragma once
// Committed numeric baselines: small "name value" tables that regression
// tests compare against freshly measured constants, so numerical drift in a
// refactor shows up as a test failure instead of a silent change.  Lines
// starting with '#' are comments.

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hypersieve::baselines {

// Directory holding the committed tables, from HYPERSIEVE_BASELINE_DIR.
// Empty string when the variable is unset.
std::string baseline_dir();

// Parses "name value" rows (whitespace separated, one per line); throws
// std::runtime_error when the file cannot be opened or a row is malformed.
std::map<std::string, double> read_table(const std::string& path);

// Writes rows in order, preceded by one '#' comment line per header entry.
// Values carry max_digits10 precision.  Writes a temporary file in the
// target directory first and renames it into place.
void write_table(const std::string& path,
                 const std::vector<std::pair<std::string, double>>& rows,
                 const std::vector<std::string>& header);

}  // namespace hypersieve::baselines
