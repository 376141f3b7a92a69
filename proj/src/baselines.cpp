#include "hypersieve/baselines.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hypersieve::baselines {

std::string baseline_dir() {
  const char* dir = std::getenv("HYPERSIEVE_BASELINE_DIR");
  return dir ? std::string(dir) : std::string();
}

std::map<std::string, double> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("baselines: cannot open " + path);
  std::map<std::string, double> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string name;
    double value = 0.0;
    if (!(row >> name >> value))
      throw std::runtime_error("baselines: malformed row " +
                               std::to_string(lineno) + " in " + path);
    table[name] = value;
  }
  return table;
}

void write_table(const std::string& path,
                 const std::vector<std::pair<std::string, double>>& rows,
                 const std::vector<std::string>& header) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("baselines: cannot write " + tmp.string());
    for (const std::string& h : header) out << "# " << h << "\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& [name, value] : rows) out << name << " " << value << "\n";
    if (!out) throw std::runtime_error("baselines: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace hypersieve::baselines
