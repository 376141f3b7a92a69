// Batch driver: one command per invocation, one artifact per run.
//
//   hypersieve trace --variant b --X 200 --out trace.json
//   hypersieve invert --out roundtrip.csv
//   hypersieve window --T 4 --r 0.1 --out bounds.csv
//   hypersieve sieve --seed 42 --out report.json
//
// Flags override values from --config <file>; the positional command and
// --command are interchangeable.  Exit codes: 0 success, 2 validation or
// I/O error, 3 numerical non-convergence, 4 census non-saturation.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hypersieve/cli.hpp"

namespace cli = hypersieve::cli;

int main(int argc, char** argv) {
  CLI::App app{"hypersieve: transforms, window bounds, lattice censuses, "
               "trace sums, and sieve experiments as plot-ready tables"};
  app.set_version_flag("--version", std::string(cli::kToolName) + " " +
                                        cli::kToolVersion);

  std::string command_pos, command_flag, config_path, out, format, zspec,
      variant;
  double T = 0, r = 0, X = 0, H = 0, tol = 0, seed = 0, t_max = 0,
         t_count = 0, p_min = 0, p_max = 0, p_count = 0, density = 0,
         delta = 0, count = 0, trials = 0;

  app.add_option("cmd", command_pos,
                 "transform | invert | window | lattice | trace | sieve");
  auto* o_command = app.add_option("--command", command_flag,
                                   "Command (alternative to the positional)");
  auto* o_config =
      app.add_option("--config", config_path, "JSON config file (flags win)");
  auto* o_out = app.add_option("--out", out, "Output artifact path");
  auto* o_format =
      app.add_option("--format", format, "Artifact format: csv | json");
  auto* o_variant =
      app.add_option("--variant", variant, "Trace variant: a | b");
  auto* o_z = app.add_option("--z", zspec, "Evaluation point re,im (lattice)");

  auto* o_T = app.add_option("--T", T, "Window spectral width (>= 1); "
                                       "sieve spectral cutoff");
  auto* o_r = app.add_option("--r", r, "Window offset (0 < r <= log 2)");
  auto* o_X = app.add_option("--X", X, "Census |B| bound / sample X (> 1)");
  auto* o_H = app.add_option("--H", H, "Census entry bound");
  auto* o_tol = app.add_option("--tol", tol, "Quadrature tolerance");
  auto* o_seed = app.add_option("--seed", seed, "Experiment seed");
  auto* o_t_max = app.add_option("--t-max", t_max, "Spectral grid endpoint");
  auto* o_t_count = app.add_option("--t-count", t_count, "Spectral grid size");
  auto* o_p_min = app.add_option("--p-min", p_min, "Round-trip grid start");
  auto* o_p_max = app.add_option("--p-max", p_max, "Round-trip grid end");
  auto* o_p_count = app.add_option("--p-count", p_count, "Round-trip grid size");
  auto* o_density = app.add_option("--density", density, "Weyl density");
  auto* o_delta = app.add_option("--delta", delta, "Sample spacing floor");
  auto* o_count = app.add_option("--count", count, "Sample point count");
  auto* o_trials = app.add_option("--trials", trials, "Experiment trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return 0;  // --help / --version
    std::cerr << "{\"error\":{\"code\":2,\"message\":\"flag parse error\"}}\n";
    return 2;
  }

  cli::RunConfig config;
  try {
    if (o_config->count()) config = cli::config_from_json_file(config_path);
    if (!command_pos.empty())
      config.command = cli::command_from_name(command_pos);
    if (o_command->count())
      config.command = cli::command_from_name(command_flag);
    if (o_out->count()) config.output_path = out;
    if (o_format->count()) {
      config.format = cli::format_from_name(format);
      config.format_given = true;
    }
    if (o_variant->count()) config.variant = variant;
    if (o_z->count()) cli::set_z(config, zspec);

    const std::pair<CLI::Option*, std::pair<const char*, double>> numeric[] = {
        {o_T, {"T", T}},           {o_r, {"r", r}},
        {o_X, {"X", X}},           {o_H, {"H", H}},
        {o_tol, {"tol", tol}},     {o_seed, {"seed", seed}},
        {o_t_max, {"t_max", t_max}}, {o_t_count, {"t_count", t_count}},
        {o_p_min, {"p_min", p_min}}, {o_p_max, {"p_max", p_max}},
        {o_p_count, {"p_count", p_count}}, {o_density, {"density", density}},
        {o_delta, {"delta", delta}}, {o_count, {"count", count}},
        {o_trials, {"trials", trials}}};
    for (const auto& [opt, kv] : numeric)
      if (opt->count()) config.params[kv.first] = kv.second;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '"' || ch == '\\') ch = '\'';
    std::fprintf(stderr, "{\"error\":{\"code\":2,\"message\":\"%s\"}}\n",
                 msg.c_str());
    return 2;
  }

  return cli::run(config);
}
