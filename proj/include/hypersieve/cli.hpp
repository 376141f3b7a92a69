#pragma once
// Batch front door.  A RunConfig names one of six commands and a handful of
// numeric parameters; run() executes it and writes a single CSV or JSON
// artifact (the sieve command adds a sibling spectrum CSV).  Outputs are
// plot-ready tables: no interactive mode, no plotting.
//
// Contract highlights:
//   - validate() returns every violation without executing anything.
//   - run() exits 0 on success, 2 on validation or input/output errors,
//     3 on numerical non-convergence, 4 when a census fails to saturate,
//     and reports failures as one machine-readable JSON line on stderr.
//   - Identical config + seed => byte-identical output files.  Every
//     artifact embeds the resolved parameter set and the tool version.
//   - Files are written atomically (temp file in the target directory,
//     then rename).

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypersieve::cli {

inline constexpr const char* kToolName = "hypersieve";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Command { none, transform, invert, window, lattice, trace, sieve };
enum class OutputFormat { csv, json };

// Round-trip helpers; from-string parsing throws std::invalid_argument on
// unknown names.
std::string command_name(Command c);
Command command_from_name(const std::string& name);
std::string format_name(OutputFormat f);
OutputFormat format_from_name(const std::string& name);

// The artifact format each command emits when --format is not given: CSV
// tables for transform/invert/window/lattice, JSON reports for trace/sieve.
OutputFormat default_format(Command c);

struct RunConfig {
  Command command = Command::none;
  // Numeric knobs (T, r, X, H, tol, seed, z_re/z_im, grid sizes...).  Keys
  // absent here take the per-command defaults reported by resolved_params().
  std::map<std::string, double> params;
  std::string variant = "b";  // trace only: "a" | "b"
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  bool format_given = false;  // set when --format / config "format" present
};

// The parameter map with per-command defaults filled in; exactly the set
// embedded in the artifact.  Unknown keys are preserved (they are rejected
// by validate()).
std::map<std::string, double> resolved_params(const RunConfig& config);

// All violations, without executing: missing command/output path, range
// checks (T >= 1, 0 < r <= log 2, X > 1, tol > 0, integer-valued counts,
// seed in the exactly-representable range, z in the upper half-plane,
// variant in {a, b}), and unknown parameter names.
std::vector<std::string> validate(const RunConfig& config);

// Executes the command and writes the artifact(s).  Returns the process
// exit code (0 / 2 / 3 / 4).  On failure a one-line JSON object
//   {"error": {"code": .., "message": .., "diagnostics": [..]}}
// is written to *error_json when given, to stderr otherwise.
int run(const RunConfig& config, std::string* error_json = nullptr);

// The exit code run() maps an escaped exception to: census saturation
// failures -> 4, quadrature/divergence failures -> 3, everything else
// (bad arguments, I/O) -> 2.
int exit_code_for(const std::exception& e);

// Loads a JSON config file mirroring the command-line flags:
//   {"command": "trace", "out": "trace.json", "format": "json",
//    "variant": "b", "T": 4, "r": 0.1, "X": 200, "H": 128,
//    "z": "0.5,1.2", ...}
// Numeric keys go to params; "z" accepts "re,im" or [re, im].  Throws
// std::invalid_argument on unreadable files or malformed values.
RunConfig config_from_json_file(const std::string& path);

// Splits "re,im" into params z_re / z_im (used by --z and config files).
void set_z(RunConfig& config, const std::string& spec);

// %.12g formatting used for every CSV number (shortest reading that
// round-trips 12 significant digits).
std::string fmt12(double x);

}  // namespace hypersieve::cli
