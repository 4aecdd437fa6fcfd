#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "selftrap/execute.hpp"
#include "selftrap/run_spec.hpp"

using namespace selftrap;
using namespace selftrap::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("selftrap_test_" + name);
  fs::remove_all(dir);
  return dir;
}

RunSpec from_text(const std::string& text) {
  ConfigSources src;
  src.file = read_settings(text);
  return parse_config(src);
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("figure presets") {
  ConfigSources src;
  src.figure = "fig2";
  RunSpec s = parse_config(src);
  CHECK(s.command == Command::ensemble);
  CHECK(s.params.gamma == 10.0);
  CHECK(s.params.delta_pump == 60.0);
  CHECK(s.params.g == 50.0);
  CHECK(s.params.detuning == 250.0);
  CHECK(temperature_ratio(s.traj().p0_spread * s.traj().p0_spread, s.params) == doctest::Approx(1.0));

  src.figure = "fig6";
  s = parse_config(src);
  CHECK(s.command == Command::scan_delta);
  CHECK(s.params.detuning == 200.0);
  CHECK(s.params.g == 100.0);
  CHECK(s.params.gamma == 0.0);
  CHECK(s.scan_values.size() > 3);

  for (const std::string& name : preset_names()) {
    src.figure = name;
    CHECK_NOTHROW(parse_config(src));
  }
  src.figure = "fig9";
  CHECK_THROWS_WITH_AS(parse_config(src), doctest::Contains("run.figure"), ConfigError);
}

TEST_CASE("config errors name key and line") {
  try {
    from_text("run.command = steady\nparams.g = -1\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "params.g");
  }
  try {
    from_text("run.command = steady\n# comment\nparams.gee = 3\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "params.gee");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
  }
  try {
    from_text("run.command = traj\nparams.n_max = 3.5\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "params.n_max");
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_WITH_AS(from_text("params.g = 3\n"), doctest::Contains("run.command"), ConfigError);
  CHECK_THROWS_WITH_AS(from_text("run.command = traj\nparams.g\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(from_text("run.command = scan-g\n"), doctest::Contains("scan.values"), ConfigError);
  CHECK_THROWS_AS(from_text("run.command = fly\n"), ConfigError);
  CHECK_THROWS_AS(from_text("run.command = traj\noutput.plot_script = maybe\n"), ConfigError);
}

TEST_CASE("flags override file values, file overrides preset") {
  ConfigSources src;
  src.figure = "fig2";
  src.file = read_settings("params.g = 40  # weaker\ntraj.dt = 2e-4\n");
  src.overrides = {{"traj.dt", "1e-4", 0}};
  const RunSpec s = parse_config(src);
  CHECK(s.params.g == 40.0);
  CHECK(s.traj().dt == 1e-4);
  CHECK(s.params.delta_pump == 60.0);
}

TEST_CASE("lists and ranges") {
  RunSpec s = from_text("run.command = scan-g\nscan.values = 0:2.5:10\n");
  CHECK(s.scan_values == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
  s = from_text("run.command = scan-g\nscan.values = [1, 2.5, 4]\n");
  CHECK(s.scan_values == std::vector<double>{1.0, 2.5, 4.0});
}

TEST_CASE("resolved.json round trip") {
  ConfigSources src;
  src.figure = "fig4-d80";
  src.overrides = {{"traj.seed", "18446744073709551615", 0}, {"params.recoil", "0.0123456789012345", 0}};
  const RunSpec a = parse_config(src);
  const std::string text = resolved_json(a);
  CHECK(nlohmann::json::parse(text).size() == known_keys().size() - 1);
  ConfigSources again;
  again.file = read_settings(text);
  const RunSpec b = parse_config(again);
  CHECK(resolved_json(b) == text);
  CHECK(b.traj().seed == 18446744073709551615ULL);
  CHECK(b.traj().p0_spread == a.traj().p0_spread);
}

TEST_CASE("execute: steady g-scan") {
  ConfigSources src;
  src.command = "steady";
  src.figure = "fig1";
  src.overrides = {{"run.x", "0", 0}, {"output.dir", scratch("steady").string(), 0},
                   {"output.plot_script", "true", 0}, {"output.formats", "csv,json", 0}};
  const RunSpec spec = parse_config(src);
  std::ostringstream log;
  const RunResult r = execute(spec, log);
  REQUIRE(r.exit_code == kExitOk);
  const std::string csv = slurp(spec.output.dir / "scan.csv");
  CHECK(csv.rfind("scan_var,n_mean,Q,pop_e\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + static_cast<int>(spec.scan_values.size()));
  const auto meta = nlohmann::json::parse(slurp(spec.output.dir / "meta.json"));
  CHECK(meta["schema_version"] == kSchemaVersion);
  CHECK(meta["columns"]["scan.csv"].size() == 4);
  CHECK(fs::exists(spec.output.dir / "plot.py"));
  CHECK(fs::exists(spec.output.dir / "results.json"));
  CHECK(fs::exists(spec.output.dir / "resolved.json"));
}

TEST_CASE("execute: trajectory reruns are byte-identical") {
  auto run = [](const std::string& name) {
    ConfigSources src;
    src.command = "traj";
    src.figure = "fig5";
    src.overrides = {{"traj.seed", "7", 0}, {"traj.t_final", "2", 0}, {"output.dir", scratch(name).string(), 0}};
    const RunSpec spec = parse_config(src);
    std::ostringstream log;
    REQUIRE(execute(spec, log).exit_code == kExitOk);
    return spec.output.dir;
  };
  const fs::path a = run("traj_a");
  const fs::path b = run("traj_b");
  for (const char* f : {"timeseries.csv", "trajectory.csv", "jumps.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string ts = slurp(a / "timeseries.csv");
  CHECK(ts.rfind("t,n_mean,n_se,Q,pop_e,T_over_TD,T_se\n", 0) == 0);
}

TEST_CASE("execute: exit codes") {
  std::ostringstream log;
  ConfigSources src;
  src.command = "traj";
  src.figure = "fig5";
  src.overrides = {{"params.n_max", "2", 0}, {"output.dir", scratch("trunc").string(), 0}};
  RunSpec spec = parse_config(src);
  RunResult r = execute(spec, log);
  CHECK(r.exit_code == kExitNumerical);
  CHECK(r.message.find("params.n_max") != std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(spec.output.dir / "meta.json"));
  CHECK(meta["exit_code"] == kExitNumerical);

  src.overrides = {{"traj.dt", "0.01", 0}, {"output.dir", scratch("coarse").string(), 0}};
  CHECK(execute(parse_config(src), log).exit_code == kExitNumerical);

  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  src.overrides = {{"output.dir", (blocker / "sub").string(), 0}};
  CHECK(execute(parse_config(src), log).exit_code == kExitUsage);
  fs::remove(blocker);
}

TEST_CASE("csv schemas") {
  CHECK(csv_columns("histogram.csv") == std::vector<std::string>{"x_over_lambda", "density"});
  CHECK(csv_columns("spectrum.csv") == std::vector<std::string>{"omega_over_kappa", "S_normalized"});
  CHECK_THROWS_AS(csv_columns("nope.csv"), InvalidArgument);
}
