#include "hypersieve/cli.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "hypersieve/lattice.hpp"
#include "hypersieve/numerics.hpp"
#include "hypersieve/sieve.hpp"
#include "hypersieve/transforms.hpp"
#include "hypersieve/window.hpp"

namespace hypersieve::cli {

namespace {

using nlohmann::json;

// Largest double that still holds every smaller non-negative integer
// exactly; seeds beyond it would silently lose bits in the param map.
constexpr double kMaxExactInteger = 9007199254740992.0;  // 2^53

bool is_integer(double x) {
  return std::isfinite(x) && x == std::floor(x) &&
         std::fabs(x) <= kMaxExactInteger;
}

double param_or(const std::map<std::string, double>& params,
                const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// The reference radial test function f(p) = e^{1-p} used by the transform
// and invert commands (and the lattice command's pointwise series): smooth,
// positive, and inside the declared decay envelope e * e^{-sqrt p} on
// p >= 1.
transforms::RadialTestFunction reference_radial() {
  return transforms::RadialTestFunction(
      [](double p) { return std::exp(1.0 - p); },
      [](double p) { return -std::exp(1.0 - p); }, {M_E, 1.0});
}

QuadratureConfig quad_from(const std::map<std::string, double>& params) {
  QuadratureConfig cfg;
  cfg.abs_tol = param_or(params, "tol", cfg.abs_tol);
  cfg.rel_tol = cfg.abs_tol;
  return cfg;
}

OutputFormat effective_format(const RunConfig& config) {
  return config.format_given ? config.format : default_format(config.command);
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

std::string meta_block(const RunConfig& config) {
  std::string meta;
  meta += std::string("# tool: ") + kToolName + " " + kToolVersion + "\n";
  meta += "# command: " + command_name(config.command) + "\n";
  meta += "# format: " + format_name(effective_format(config)) + "\n";
  if (config.command == Command::trace)
    meta += "# variant: " + config.variant + "\n";
  for (const auto& [key, value] : resolved_params(config))
    meta += "# param " + key + ": " + fmt12(value) + "\n";
  return meta;
}

json config_json(const RunConfig& config) {
  json cfg;
  cfg["command"] = command_name(config.command);
  cfg["format"] = format_name(effective_format(config));
  cfg["out"] = config.output_path;
  if (config.command == Command::trace) cfg["variant"] = config.variant;
  cfg["params"] = resolved_params(config);
  return cfg;
}

json report_skeleton(const RunConfig& config) {
  json report;
  report["tool"] = kToolName;
  report["version"] = kToolVersion;
  report["config"] = config_json(config);
  return report;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::invalid_argument("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out)
      throw std::invalid_argument("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::invalid_argument("cannot rename into place: " + path + ": " +
                                ec.message());
  }
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

// key,value table for commands whose natural artifact is a report rather
// than a column table (trace, sieve in CSV mode).
std::string kv_csv(const RunConfig& config,
                   const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out = meta_block(config);
  out += "key,value\n";
  for (const auto& [key, value] : rows) out += key + "," + value + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void run_transform(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto quad = quad_from(params);
  const auto f = reference_radial();
  const double t_max = param_or(params, "t_max", 5.0);
  const int t_count = static_cast<int>(param_or(params, "t_count", 21.0));

  std::vector<std::array<double, 3>> rows;
  rows.reserve(t_count);
  for (int i = 0; i < t_count; ++i) {
    const double t = t_max * i / (t_count - 1);
    rows.push_back({t, transforms::d0_direct(f, t, quad),
                    transforms::d1_direct(f, t, quad)});
  }

  if (effective_format(config) == OutputFormat::csv) {
    std::string out = meta_block(config) + "t,d0,d1\n";
    for (const auto& row : rows)
      out += fmt12(row[0]) + "," + fmt12(row[1]) + "," + fmt12(row[2]) + "\n";
    write_atomic(config.output_path, out);
  } else {
    json report = report_skeleton(config);
    report["rows"] = json::array();
    for (const auto& row : rows)
      report["rows"].push_back(
          {{"t", row[0]}, {"d0", row[1]}, {"d1", row[2]}});
    write_atomic(config.output_path, dump_report(report));
  }
}

void run_invert(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto quad = quad_from(params);
  const auto f = reference_radial();
  const auto d0 = transforms::spectral_d0(f, quad);
  const auto profile = transforms::profile_from_d0(d0, quad);

  const double p_min = param_or(params, "p_min", 1.0);
  const double p_max = param_or(params, "p_max", 20.0);
  const int p_count = static_cast<int>(param_or(params, "p_count", 39.0));

  std::vector<std::array<double, 4>> rows;
  rows.reserve(p_count);
  double max_abs_err = 0.0;
  for (int i = 0; i < p_count; ++i) {
    const double p = p_min + (p_max - p_min) * i / (p_count - 1);
    const double w = std::acosh(std::sqrt(p));
    const double reconstructed = transforms::reconstruct(profile, w, quad);
    const double err = std::fabs(reconstructed - f(p));
    max_abs_err = std::max(max_abs_err, err);
    rows.push_back({p, f(p), reconstructed, err});
  }

  if (effective_format(config) == OutputFormat::csv) {
    std::string out = meta_block(config);
    out += "# max_abs_err: " + fmt12(max_abs_err) + "\n";
    out += "p,f,f_reconstructed,abs_err\n";
    for (const auto& row : rows)
      out += fmt12(row[0]) + "," + fmt12(row[1]) + "," + fmt12(row[2]) + "," +
             fmt12(row[3]) + "\n";
    write_atomic(config.output_path, out);
  } else {
    json report = report_skeleton(config);
    report["max_abs_err"] = max_abs_err;
    report["rows"] = json::array();
    for (const auto& row : rows)
      report["rows"].push_back({{"p", row[0]},
                                {"f", row[1]},
                                {"f_reconstructed", row[2]},
                                {"abs_err", row[3]}});
    write_atomic(config.output_path, dump_report(report));
  }
}

void run_window(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto quad = quad_from(params);
  window::WindowParams wp;
  wp.T = param_or(params, "T", 4.0);
  wp.r = param_or(params, "r", 0.1);
  const window::WindowReconstruction rec(wp, quad);

  struct Row {
    std::string clause;
    window::BoundReport report;
  };
  std::vector<Row> rows;
  const auto below = window::grid_below_2r(wp);
  const auto above = window::grid_above_2r(wp);
  rows.push_back({"a-i", window::bound_suite_a(
                             rec, below, window::AVariant::f0_pointwise, quad)});
  rows.push_back({"a-i", window::bound_suite_a(
                             rec, above, window::AVariant::f0_pointwise, quad)});
  rows.push_back({"a-ii", window::bound_suite_a(
                              rec, below, window::AVariant::f1_derivative, quad)});
  rows.push_back({"a-ii", window::bound_suite_a(
                              rec, above, window::AVariant::f1_derivative, quad)});
  rows.push_back({"b-i", window::bound_suite_b(rec, 0, quad)});
  rows.push_back({"b-ii", window::bound_suite_b(rec, 1, quad)});
  rows.push_back({"c-i", window::bound_suite_c(rec, 0, quad)});
  rows.push_back({"c-ii", window::bound_suite_c(rec, 1, quad)});

  if (effective_format(config) == OutputFormat::csv) {
    std::string out = meta_block(config);
    out += "clause,regime,points,skipped,ratio_sup\n";
    for (const auto& row : rows)
      out += row.clause + "," + row.report.regime + "," +
             std::to_string(row.report.grid.size()) + "," +
             std::to_string(row.report.skipped) + "," +
             fmt12(row.report.ratio_sup) + "\n";
    write_atomic(config.output_path, out);
  } else {
    json report = report_skeleton(config);
    report["rows"] = json::array();
    for (const auto& row : rows)
      report["rows"].push_back({{"clause", row.clause},
                                {"regime", row.report.regime},
                                {"points", row.report.grid.size()},
                                {"skipped", row.report.skipped},
                                {"ratio_sup", row.report.ratio_sup}});
    write_atomic(config.output_path, dump_report(report));
  }
}

void run_lattice(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto& frame = lattice::default_frame();
  const double X = param_or(params, "X", 10.0);
  const int H = static_cast<int>(param_or(params, "H", 80.0));
  const auto reps = lattice::enumerate_double_cosets(frame, X, H);

  const bool has_z = params.count("z_re") != 0;
  double huber_a0 = 0.0, huber_a1 = 0.0;
  if (has_z) {
    const std::complex<double> z(params.at("z_re"), params.at("z_im"));
    const auto quad = quad_from(params);
    const auto f = reference_radial();
    huber_a0 = lattice::huber_series_A0(f, z, frame, H, quad);
    huber_a1 = lattice::huber_series_A1(f, z, frame, H, quad);
  }

  if (effective_format(config) == OutputFormat::csv) {
    std::string out = meta_block(config);
    out += "# count: " + std::to_string(reps.size()) + "\n";
    if (has_z) {
      out += "# huber_A0: " + fmt12(huber_a0) + "\n";
      out += "# huber_A1: " + fmt12(huber_a1) + "\n";
    }
    out += lattice::census_to_csv(reps);
    write_atomic(config.output_path, out);
  } else {
    json report = report_skeleton(config);
    report["count"] = reps.size();
    if (has_z) {
      report["huber_A0"] = huber_a0;
      report["huber_A1"] = huber_a1;
    }
    report["reps"] = json::array();
    for (const auto& rep : reps)
      report["reps"].push_back({{"a", rep.element.a},
                                {"b", rep.element.b},
                                {"c", rep.element.c},
                                {"d", rep.element.d},
                                {"B", rep.B},
                                {"height", rep.height}});
    write_atomic(config.output_path, dump_report(report));
  }
}

void run_trace(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto quad = quad_from(params);
  window::WindowParams wp;
  wp.T = param_or(params, "T", 4.0);
  wp.r = param_or(params, "r", 0.1);
  const window::WindowReconstruction rec(wp, quad);

  const bool variant_a = config.variant == "a";
  const auto f = variant_a ? rec.f0_radial() : rec.f1_radial();
  const double X = param_or(params, "X", 200.0);
  const int H = static_cast<int>(param_or(params, "H", 128.0));
  const auto result = lattice::geometric_side_detail(
      variant_a ? lattice::GeomVariant::a : lattice::GeomVariant::b, f,
      lattice::default_frame(), X, H, quad);
  if (!result.saturated)
    throw lattice::CensusIncompleteError(
        "census of |B| <= " + fmt12(X) + " did not saturate at entry bound " +
        std::to_string(H) + "; rerun with a larger --H");

  const double ratio =
      result.census_abs_sum > 0.0
          ? std::fabs(result.census_sum) / result.census_abs_sum
          : 0.0;
  const int eps = lattice::epsilon_flag(H);

  if (effective_format(config) == OutputFormat::json) {
    json report = report_skeleton(config);
    report["epsilon"] = eps;
    report["value"] = result.value;
    report["identity_term"] = result.value - result.census_sum;
    report["census_sum"] = result.census_sum;
    report["census_abs_sum"] = result.census_abs_sum;
    report["cancellation_ratio"] = ratio;
    report["census_count"] = result.census_count;
    report["b_one_count"] = result.b_one_count;
    report["saturated"] = result.saturated;
    write_atomic(config.output_path, dump_report(report));
  } else {
    write_atomic(
        config.output_path,
        kv_csv(config,
               {{"epsilon", std::to_string(eps)},
                {"value", fmt12(result.value)},
                {"identity_term", fmt12(result.value - result.census_sum)},
                {"census_sum", fmt12(result.census_sum)},
                {"census_abs_sum", fmt12(result.census_abs_sum)},
                {"cancellation_ratio", fmt12(ratio)},
                {"census_count", std::to_string(result.census_count)},
                {"b_one_count", std::to_string(result.b_one_count)},
                {"saturated", result.saturated ? "1" : "0"}}));
  }
}

std::string spectrum_sibling_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + "_spectrum.csv";
}

void run_sieve(const RunConfig& config) {
  const auto params = resolved_params(config);
  const auto seed = static_cast<std::uint64_t>(param_or(params, "seed", 42.0));
  const double T = param_or(params, "T", 40.0);
  const auto spec = sieve::weyl_synthetic(param_or(params, "t_max", 50.0),
                                          param_or(params, "density", 0.01),
                                          seed);
  const auto pts = sieve::equal_spaced_points(
      param_or(params, "X", 100.0), param_or(params, "delta", 1.0),
      static_cast<int>(param_or(params, "count", 51.0)));
  const int trials = static_cast<int>(param_or(params, "trials", 50.0));
  const auto stats = sieve::sieve_experiment(pts, T, spec, trials, seed);

  const std::string spectrum_path = spectrum_sibling_path(config.output_path);
  write_atomic(spectrum_path, meta_block(config) + sieve::spectrum_to_csv(spec));

  if (effective_format(config) == OutputFormat::json) {
    json report = report_skeleton(config);
    report["seed"] = seed;
    report["params"] = resolved_params(config);
    report["ratio_max"] = stats.ratio_max;
    report["ratio_mean"] = stats.ratio_mean;
    report["partition_required"] = stats.partition_required;
    report["spectrum"] = {{"path", spectrum_path},
                          {"count", spec.eigen_ts.size()}};
    write_atomic(config.output_path, dump_report(report));
  } else {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("seed", std::to_string(seed));
    for (const auto& [key, value] : params)
      rows.emplace_back("params." + key, fmt12(value));
    rows.emplace_back("ratio_max", fmt12(stats.ratio_max));
    rows.emplace_back("ratio_mean", fmt12(stats.ratio_mean));
    rows.emplace_back("partition_required",
                      stats.partition_required ? "1" : "0");
    rows.emplace_back("spectrum_path", spectrum_path);
    rows.emplace_back("spectrum_count", std::to_string(spec.eigen_ts.size()));
    write_atomic(config.output_path, kv_csv(config, rows));
  }
}

int fail(int code, const std::string& message,
         const std::vector<std::string>& diagnostics,
         std::string* error_json) {
  json err;
  err["error"]["code"] = code;
  err["error"]["message"] = message;
  err["error"]["diagnostics"] = diagnostics;
  const std::string line = err.dump() + "\n";
  if (error_json)
    *error_json = line;
  else
    std::cerr << line;
  return code;
}

}  // namespace

// ---------------------------------------------------------------------------
// Names and defaults
// ---------------------------------------------------------------------------

std::string command_name(Command c) {
  switch (c) {
    case Command::none: return "none";
    case Command::transform: return "transform";
    case Command::invert: return "invert";
    case Command::window: return "window";
    case Command::lattice: return "lattice";
    case Command::trace: return "trace";
    case Command::sieve: return "sieve";
  }
  return "none";
}

Command command_from_name(const std::string& name) {
  if (name == "transform") return Command::transform;
  if (name == "invert") return Command::invert;
  if (name == "window") return Command::window;
  if (name == "lattice") return Command::lattice;
  if (name == "trace") return Command::trace;
  if (name == "sieve") return Command::sieve;
  throw std::invalid_argument("unknown command: " + name);
}

std::string format_name(OutputFormat f) {
  return f == OutputFormat::csv ? "csv" : "json";
}

OutputFormat format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown format: " + name);
}

OutputFormat default_format(Command c) {
  return (c == Command::trace || c == Command::sieve) ? OutputFormat::json
                                                      : OutputFormat::csv;
}

std::map<std::string, double> resolved_params(const RunConfig& config) {
  std::map<std::string, double> defaults;
  switch (config.command) {
    case Command::transform:
      defaults = {{"tol", 1e-10}, {"t_max", 5.0}, {"t_count", 21.0}};
      break;
    case Command::invert:
      defaults = {{"tol", 1e-10},
                  {"p_min", 1.0},
                  {"p_max", 20.0},
                  {"p_count", 39.0}};
      break;
    case Command::window:
      defaults = {{"tol", 1e-10}, {"T", 4.0}, {"r", 0.1}};
      break;
    case Command::lattice:
      defaults = {{"tol", 1e-10}, {"X", 10.0}, {"H", 80.0}};
      break;
    case Command::trace:
      defaults = {{"tol", 1e-10},
                  {"T", 4.0},
                  {"r", 0.1},
                  {"X", 200.0},
                  {"H", 128.0}};
      break;
    case Command::sieve:
      defaults = {{"seed", 42.0},  {"T", 40.0},    {"t_max", 50.0},
                  {"density", 0.01}, {"X", 100.0}, {"delta", 1.0},
                  {"count", 51.0},  {"trials", 50.0}};
      break;
    case Command::none:
      break;
  }
  for (const auto& [key, value] : config.params) defaults[key] = value;
  return defaults;
}

std::vector<std::string> validate(const RunConfig& config) {
  std::vector<std::string> diags;
  if (config.command == Command::none) {
    diags.push_back("missing command (transform | invert | window | lattice "
                    "| trace | sieve)");
    return diags;
  }
  if (config.output_path.empty())
    diags.push_back("missing output path (--out)");

  // Keys each command consumes; anything else in the user map is a typo.
  std::map<std::string, double> known_map;
  {
    RunConfig probe;
    probe.command = config.command;
    known_map = resolved_params(probe);
  }
  if (config.command == Command::lattice) {
    known_map["z_re"] = 0.0;
    known_map["z_im"] = 0.0;
  }
  for (const auto& [key, value] : config.params) {
    if (!known_map.count(key))
      diags.push_back("unknown parameter '" + key + "' for command '" +
                      command_name(config.command) + "'");
    else if (!std::isfinite(value))
      diags.push_back("parameter '" + key + "' must be finite");
  }

  const auto params = resolved_params(config);
  const auto check_int = [&](const std::string& key, double lo) {
    const double v = params.at(key);
    if (!is_integer(v) || v < lo)
      diags.push_back("parameter '" + key + "' must be an integer >= " +
                      fmt12(lo) + " (got " + fmt12(v) + ")");
  };
  const auto check_range = [&](const std::string& key, bool ok,
                               const std::string& what) {
    if (!ok)
      diags.push_back("parameter '" + key + "' " + what + " (got " +
                      fmt12(params.at(key)) + ")");
  };

  if (known_map.count("tol"))
    check_range("tol", params.at("tol") > 0.0 && params.at("tol") < 1.0,
                "must be in (0, 1)");
  if (known_map.count("T"))
    check_range("T", params.at("T") >= 1.0, "must be >= 1");
  if (known_map.count("r"))
    check_range("r",
                params.at("r") > 0.0 &&
                    params.at("r") <= std::log(2.0) + 1e-12,
                "must satisfy 0 < r <= log 2");
  if (known_map.count("X"))
    check_range("X", params.at("X") > 1.0, "must be > 1");
  if (known_map.count("H")) check_int("H", 1.0);

  switch (config.command) {
    case Command::transform:
      check_range("t_max", params.at("t_max") > 0.0, "must be > 0");
      check_int("t_count", 2.0);
      break;
    case Command::invert:
      check_range("p_min", params.at("p_min") >= 1.0, "must be >= 1");
      check_range("p_max", params.at("p_max") > params.at("p_min"),
                  "must exceed p_min");
      check_int("p_count", 2.0);
      break;
    case Command::lattice:
      if (config.params.count("z_re") != config.params.count("z_im")) {
        diags.push_back("z requires both coordinates (--z re,im)");
      } else if (config.params.count("z_im") &&
                 !(config.params.at("z_im") > 0.0)) {
        diags.push_back("z must lie in the upper half-plane (Im z > 0)");
      }
      break;
    case Command::trace:
      if (config.variant != "a" && config.variant != "b")
        diags.push_back("variant must be 'a' or 'b' (got '" + config.variant +
                        "')");
      break;
    case Command::sieve: {
      const double seed = params.at("seed");
      if (!is_integer(seed) || seed < 0.0)
        diags.push_back("seed must be a non-negative integer below 2^53 "
                        "(got " + fmt12(seed) + ")");
      check_range("t_max", params.at("t_max") >= 0.0, "must be >= 0");
      check_range("density", params.at("density") > 0.0, "must be > 0");
      check_range("delta", params.at("delta") > 0.0, "must be > 0");
      check_int("count", 1.0);
      check_int("trials", 0.0);
      break;
    }
    default:
      break;
  }
  return diags;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const lattice::CensusIncompleteError*>(&e)) return 4;
  if (dynamic_cast<const QuadratureError*>(&e)) return 3;
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  return 2;
}

int run(const RunConfig& config, std::string* error_json) {
  const auto diags = validate(config);
  if (!diags.empty())
    return fail(2, "invalid configuration", diags, error_json);
  try {
    switch (config.command) {
      case Command::transform: run_transform(config); break;
      case Command::invert: run_invert(config); break;
      case Command::window: run_window(config); break;
      case Command::lattice: run_lattice(config); break;
      case Command::trace: run_trace(config); break;
      case Command::sieve: run_sieve(config); break;
      case Command::none: break;  // unreachable: validate() rejected it
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(exit_code_for(e), e.what(), {}, error_json);
  }
}

void set_z(RunConfig& config, const std::string& spec) {
  double re = 0.0, im = 0.0;
  char trailing = 0;
  if (std::sscanf(spec.c_str(), "%lf,%lf%c", &re, &im, &trailing) != 2)
    throw std::invalid_argument("z must be 're,im' (got '" + spec + "')");
  config.params["z_re"] = re;
  config.params["z_im"] = im;
}

RunConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config JSON: ") +
                                e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config file must hold a JSON object");

  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      config.command = command_from_name(value.get<std::string>());
    } else if (key == "out") {
      config.output_path = value.get<std::string>();
    } else if (key == "format") {
      config.format = format_from_name(value.get<std::string>());
      config.format_given = true;
    } else if (key == "variant") {
      config.variant = value.get<std::string>();
    } else if (key == "z") {
      if (value.is_string()) {
        set_z(config, value.get<std::string>());
      } else if (value.is_array() && value.size() == 2) {
        config.params["z_re"] = value[0].get<double>();
        config.params["z_im"] = value[1].get<double>();
      } else {
        throw std::invalid_argument("config key 'z' must be 're,im' or "
                                    "[re, im]");
      }
    } else if (value.is_number()) {
      config.params[key] = value.get<double>();
    } else {
      throw std::invalid_argument("config key '" + key +
                                  "' must be numeric");
    }
  }
  return config;
}

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace hypersieve::cli
