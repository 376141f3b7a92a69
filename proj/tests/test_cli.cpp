#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "hypersieve/baselines.hpp"
#include "hypersieve/cli.hpp"
#include "hypersieve/lattice.hpp"
#include "hypersieve/numerics.hpp"
#include "hypersieve/sieve.hpp"

using namespace hypersieve;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& out_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("hypersieve_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string out_path(const std::string& name) {
  return (out_dir() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing artifact: " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

cli::RunConfig base_config(cli::Command cmd, const std::string& out) {
  cli::RunConfig config;
  config.command = cmd;
  config.output_path = out_path(out);
  return config;
}

int data_rows(const std::string& csv) {
  int rows = 0;
  bool past_header = false;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!past_header) {
      past_header = true;  // column header
      continue;
    }
    ++rows;
  }
  return rows;
}

std::string baselines_path(const char* file) {
  std::string dir = baselines::baseline_dir();
  if (dir.empty()) dir = "baselines";
  return dir + std::string("/") + file;
}

}  // namespace

TEST_CASE("names, formats, and defaults round trip") {
  for (auto cmd : {cli::Command::transform, cli::Command::invert,
                   cli::Command::window, cli::Command::lattice,
                   cli::Command::trace, cli::Command::sieve})
    CHECK(cli::command_from_name(cli::command_name(cmd)) == cmd);
  CHECK_THROWS_AS(cli::command_from_name("polish"), std::invalid_argument);

  CHECK(cli::format_from_name("csv") == cli::OutputFormat::csv);
  CHECK(cli::format_from_name("json") == cli::OutputFormat::json);
  CHECK_THROWS_AS(cli::format_from_name("yaml"), std::invalid_argument);

  CHECK(cli::default_format(cli::Command::invert) == cli::OutputFormat::csv);
  CHECK(cli::default_format(cli::Command::trace) == cli::OutputFormat::json);
  CHECK(cli::default_format(cli::Command::sieve) == cli::OutputFormat::json);

  cli::RunConfig config;
  config.command = cli::Command::trace;
  auto params = cli::resolved_params(config);
  CHECK(params.at("T") == 4.0);
  CHECK(params.at("X") == 200.0);
  config.params["X"] = 20.0;
  CHECK(cli::resolved_params(config).at("X") == 20.0);
  CHECK(cli::resolved_params(config).at("T") == 4.0);

  CHECK(cli::fmt12(0.1) == "0.1");
  CHECK(cli::fmt12(42.0) == "42");
  CHECK(cli::fmt12(1e-10) == "1e-10");
}

TEST_CASE("validate reports every violation without executing") {
  cli::RunConfig empty;
  const auto missing = cli::validate(empty);
  REQUIRE(missing.size() == 1);
  CHECK(contains(missing[0], "missing command"));

  auto window = base_config(cli::Command::window, "unused.csv");
  CHECK(cli::validate(window).empty());
  window.params["T"] = 0.5;
  const auto bad_t = cli::validate(window);
  REQUIRE(bad_t.size() == 1);
  CHECK(contains(bad_t[0], "'T'"));
  window.params["T"] = 4.0;
  window.params["r"] = 0.8;  // above log 2
  REQUIRE(cli::validate(window).size() == 1);
  window.params["r"] = 0.0;
  REQUIRE(cli::validate(window).size() == 1);

  auto lattice_cfg = base_config(cli::Command::lattice, "unused.csv");
  lattice_cfg.params["X"] = 1.0;
  CHECK(cli::validate(lattice_cfg).size() == 1);
  lattice_cfg.params["X"] = 10.0;
  lattice_cfg.params["H"] = 2.5;  // not an integer
  CHECK(cli::validate(lattice_cfg).size() == 1);
  lattice_cfg.params["H"] = 80.0;
  lattice_cfg.params["z_re"] = 0.5;  // z_im missing
  CHECK(cli::validate(lattice_cfg).size() == 1);
  lattice_cfg.params["z_im"] = -1.0;  // lower half-plane
  CHECK(cli::validate(lattice_cfg).size() == 1);
  lattice_cfg.params["z_im"] = 1.0;
  CHECK(cli::validate(lattice_cfg).empty());

  auto typo = base_config(cli::Command::window, "unused.csv");
  typo.params["delta"] = 0.1;  // sieve knob on a window run
  const auto unknown = cli::validate(typo);
  REQUIRE(unknown.size() == 1);
  CHECK(contains(unknown[0], "unknown parameter 'delta'"));

  auto sieve_cfg = base_config(cli::Command::sieve, "unused.json");
  sieve_cfg.params["seed"] = 1.5;
  CHECK(cli::validate(sieve_cfg).size() == 1);
  sieve_cfg.params["seed"] = 42.0;
  sieve_cfg.params["trials"] = -1.0;
  CHECK(cli::validate(sieve_cfg).size() == 1);

  auto trace_cfg = base_config(cli::Command::trace, "unused.json");
  trace_cfg.variant = "c";
  CHECK(cli::validate(trace_cfg).size() == 1);

  auto no_out = base_config(cli::Command::transform, "x");
  no_out.output_path.clear();
  const auto diags = cli::validate(no_out);
  REQUIRE(diags.size() == 1);
  CHECK(contains(diags[0], "output path"));
}

TEST_CASE("exit codes map exception families to the contract") {
  CHECK(cli::exit_code_for(lattice::CensusIncompleteError("x")) == 4);
  CHECK(cli::exit_code_for(QuadratureError("x", 0.0, 1.0)) == 3);
  CHECK(cli::exit_code_for(DivergenceError("x")) == 3);
  CHECK(cli::exit_code_for(std::invalid_argument("x")) == 2);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 2);
}

TEST_CASE("run rejects invalid configs with machine-readable errors") {
  auto config = base_config(cli::Command::window, "never_written.csv");
  config.params["T"] = 0.25;
  std::string err;
  CHECK(cli::run(config, &err) == 2);
  CHECK_FALSE(fs::exists(config.output_path));
  const json parsed = json::parse(err);
  CHECK(parsed["error"]["code"] == 2);
  CHECK(parsed["error"]["diagnostics"].size() == 1);

  // Unwritable output directory surfaces as a validation-class failure.
  auto io_fail = base_config(cli::Command::lattice, "x");
  io_fail.output_path = (out_dir() / "no_such_dir" / "x.csv").string();
  std::string io_err;
  CHECK(cli::run(io_fail, &io_err) == 2);
  CHECK(json::parse(io_err)["error"]["code"] == 2);
}

TEST_CASE("transform command emits the spectral table") {
  auto config = base_config(cli::Command::transform, "transform.csv");
  config.params["t_count"] = 5.0;
  config.params["t_max"] = 2.0;
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);

  const std::string csv = slurp(config.output_path);
  CHECK(csv.rfind("# tool: hypersieve 1.0.0\n", 0) == 0);
  CHECK(contains(csv, "# command: transform\n"));
  CHECK(contains(csv, "# param t_count: 5\n"));
  CHECK(contains(csv, "t,d0,d1\n"));
  CHECK(data_rows(csv) == 5);

  // Byte-identical on rerun.
  REQUIRE(cli::run(config, &err) == 0);
  CHECK(slurp(config.output_path) == csv);

  // JSON variant carries the same grid with the config embedded.
  config.output_path = out_path("transform.json");
  config.format = cli::OutputFormat::json;
  config.format_given = true;
  REQUIRE(cli::run(config, &err) == 0);
  const json report = json::parse(slurp(config.output_path));
  CHECK(report["tool"] == "hypersieve");
  CHECK(report["config"]["command"] == "transform");
  CHECK(report["config"]["params"]["t_max"] == 2.0);
  REQUIRE(report["rows"].size() == 5);
  CHECK(report["rows"][0]["t"] == 0.0);
  CHECK(report["rows"][4]["t"] == 2.0);

  // The first row is the t = 0 pairing of the reference f, a positive
  // number of order one.
  const double d0_at_zero = report["rows"][0]["d0"].get<double>();
  CHECK(d0_at_zero > 0.1);
  CHECK(d0_at_zero < 10.0);
}

TEST_CASE("invert command reports a round trip within the contract") {
  auto config = base_config(cli::Command::invert, "invert.csv");
  config.params["p_count"] = 5.0;
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);
  const std::string csv = slurp(config.output_path);
  CHECK(contains(csv, "p,f,f_reconstructed,abs_err\n"));
  CHECK(data_rows(csv) == 5);

  const auto pos = csv.find("# max_abs_err: ");
  REQUIRE(pos != std::string::npos);
  const double max_err = std::strtod(csv.c_str() + pos + 15, nullptr);
  CHECK(max_err < 1e-3);
  CHECK(max_err >= 0.0);
}

TEST_CASE("window command reproduces the committed clause constants") {
  auto config = base_config(cli::Command::window, "window.csv");
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);
  const std::string csv = slurp(config.output_path);
  CHECK(contains(csv, "clause,regime,points,skipped,ratio_sup\n"));
  CHECK(data_rows(csv) == 8);

  // Per-clause maxima over the regime rows against the baseline table.
  const auto table =
      baselines::read_table(baselines_path("window_bounds.txt"));
  std::map<std::string, double> measured;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'c') continue;
    const auto first = line.find(',');
    const auto last = line.rfind(',');
    const std::string clause = line.substr(0, first);
    const double ratio = std::strtod(line.c_str() + last + 1, nullptr);
    measured[clause] = std::max(measured[clause], ratio);
  }
  for (const auto& name : {"a-i", "a-ii", "b-i", "b-ii", "c-i", "c-ii"}) {
    const auto it = table.find(std::string(name) + "/4/0.1");
    REQUIRE_MESSAGE(it != table.end(), "baseline missing " << name);
    CHECK(measured.at(name) == doctest::Approx(it->second).epsilon(1e-9));
  }
}

TEST_CASE("lattice command emits the census with optional series values") {
  auto config = base_config(cli::Command::lattice, "census.csv");
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);
  const std::string csv = slurp(config.output_path);
  CHECK(contains(csv, "# count: 25\n"));
  CHECK(contains(csv, "a,b,c,d,B,height\n"));
  CHECK(contains(csv, "0,1,-1,1,-0.6,1\n"));
  CHECK(data_rows(csv) == 25);

  // Pointwise Huber values ride along when z is given.
  cli::set_z(config, "0.3333333333333333,1.0");
  config.output_path = out_path("census_z.csv");
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);
  const std::string with_z = slurp(config.output_path);
  CHECK(contains(with_z, "# huber_A0: 5.80919274297\n"));
  CHECK(contains(with_z, "# huber_A1: "));

  // JSON variant.
  config.params.erase("z_re");
  config.params.erase("z_im");
  config.output_path = out_path("census.json");
  config.format = cli::OutputFormat::json;
  config.format_given = true;
  REQUIRE(cli::run(config, &err) == 0);
  const json report = json::parse(slurp(config.output_path));
  CHECK(report["count"] == 25);
  REQUIRE(report["reps"].size() == 25);
  CHECK(report["reps"][0]["a"] == 0);
  CHECK(report["reps"][0]["B"] == -0.6);

  // Unsaturated census: exit 4.
  auto shallow = base_config(cli::Command::lattice, "unsat.csv");
  shallow.params["X"] = 40.0;
  shallow.params["H"] = 2.0;
  std::string census_err;
  CHECK(cli::run(shallow, &census_err) == 4);
  CHECK(json::parse(census_err)["error"]["code"] == 4);
  CHECK_FALSE(fs::exists(shallow.output_path));
}

TEST_CASE("trace command reports the cancellation identity") {
  auto config = base_config(cli::Command::trace, "trace.json");
  config.variant = "b";
  config.params["X"] = 20.0;
  config.params["H"] = 80.0;
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);

  const json report = json::parse(slurp(config.output_path));
  CHECK(report["epsilon"] == 1);
  CHECK(report["saturated"] == true);
  CHECK(report["b_one_count"] == 1);
  CHECK(report["census_count"].get<int>() > 10);
  CHECK(report["cancellation_ratio"].get<double>() <= 0.05);
  // Variant b weights the identity contribution by (1 - epsilon) = 0.
  CHECK(report["identity_term"] == 0.0);
  CHECK(report["value"] == report["census_sum"]);
  CHECK(report["config"]["variant"] == "b");

  // CSV rendering of the same report.
  config.output_path = out_path("trace.csv");
  config.format = cli::OutputFormat::csv;
  config.format_given = true;
  REQUIRE(cli::run(config, &err) == 0);
  const std::string csv = slurp(config.output_path);
  CHECK(contains(csv, "# variant: b\n"));
  CHECK(contains(csv, "key,value\n"));
  CHECK(contains(csv, "epsilon,1\n"));
  CHECK(contains(csv, "saturated,1\n"));
}

TEST_CASE("sieve command writes the report and the spectrum sidecar") {
  auto config = base_config(cli::Command::sieve, "report.json");
  std::string err;
  REQUIRE_MESSAGE(cli::run(config, &err) == 0, err);

  const json report = json::parse(slurp(config.output_path));
  CHECK(report["seed"] == 42);
  CHECK(report["params"]["T"] == 40.0);
  CHECK(report["params"]["trials"] == 50.0);
  CHECK(report["partition_required"] == false);

  // The canonical experiment: exact agreement with the committed baseline.
  const auto table =
      baselines::read_table(baselines_path("sieve_constants.txt"));
  CHECK(report["ratio_max"].get<double>() ==
        table.at("sieve-ratio-max/T40/seed42"));
  CHECK(report["ratio_mean"].get<double>() ==
        table.at("sieve-ratio-mean/T40/seed42"));

  // Sidecar: '#' metadata, then a spectrum that parses back to the
  // generating spectrum.
  const std::string spath = report["spectrum"]["path"].get<std::string>();
  CHECK(spath == out_path("report_spectrum.csv"));
  const std::string scsv = slurp(spath);
  CHECK(scsv.rfind("# tool: hypersieve", 0) == 0);
  const auto parsed = sieve::spectrum_from_csv(scsv);
  const auto expected = sieve::weyl_synthetic(50.0, 0.01, 42);
  CHECK(parsed.eigen_ts == expected.eigen_ts);
  CHECK(parsed.periods == expected.periods);
  CHECK(report["spectrum"]["count"] == parsed.eigen_ts.size());

  // CSV rendering.
  config.output_path = out_path("report.csv");
  config.format = cli::OutputFormat::csv;
  config.format_given = true;
  REQUIRE(cli::run(config, &err) == 0);
  const std::string csv = slurp(config.output_path);
  CHECK(contains(csv, "key,value\n"));
  CHECK(contains(csv, "seed,42\n"));
  CHECK(contains(csv, "ratio_max,0.0235263970345\n"));
}

TEST_CASE("config files mirror the flags and flags win") {
  const std::string path = out_path("config.json");
  {
    std::ofstream out(path);
    out << R"({"command": "lattice", "out": "from_file.csv",
               "format": "json", "X": 5, "H": 80,
               "z": [0.5, 1.25]})";
  }
  auto config = cli::config_from_json_file(path);
  CHECK(config.command == cli::Command::lattice);
  CHECK(config.output_path == "from_file.csv");
  CHECK(config.format == cli::OutputFormat::json);
  CHECK(config.format_given);
  CHECK(config.params.at("X") == 5.0);
  CHECK(config.params.at("z_re") == 0.5);
  CHECK(config.params.at("z_im") == 1.25);

  // A later flag overrides the file value.
  config.params["X"] = 10.0;
  CHECK(cli::resolved_params(config).at("X") == 10.0);

  // z as a "re,im" string.
  {
    std::ofstream out(path);
    out << R"({"command": "lattice", "z": "0.25,2.0"})";
  }
  const auto zs = cli::config_from_json_file(path);
  CHECK(zs.params.at("z_re") == 0.25);
  CHECK(zs.params.at("z_im") == 2.0);

  {
    std::ofstream out(path);
    out << R"({"command": "lattice", "H": "eighty"})";
  }
  CHECK_THROWS_AS(cli::config_from_json_file(path), std::invalid_argument);
  {
    std::ofstream out(path);
    out << "not json";
  }
  CHECK_THROWS_AS(cli::config_from_json_file(path), std::invalid_argument);
  CHECK_THROWS_AS(cli::config_from_json_file(out_path("absent.json")),
                  std::invalid_argument);

  cli::RunConfig zcfg;
  CHECK_THROWS_AS(cli::set_z(zcfg, "1.0"), std::invalid_argument);
  CHECK_THROWS_AS(cli::set_z(zcfg, "1.0,2.0,3.0"), std::invalid_argument);
  cli::set_z(zcfg, "-0.5,2.5");
  CHECK(zcfg.params.at("z_re") == -0.5);
  CHECK(zcfg.params.at("z_im") == 2.5);
}

TEST_CASE("artifacts land atomically with no temp residue") {
  int temp_files = 0;
  for (const auto& entry : fs::directory_iterator(out_dir()))
    if (entry.path().string().ends_with(".tmp")) ++temp_files;
  CHECK(temp_files == 0);
}
