#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selftrap/execute.hpp"
#include "selftrap/run_spec.hpp"

namespace {

using selftrap::cli::Setting;

template <typename T>
void add_override(std::vector<Setting>& out, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    out.push_back({key, *v, 0});
  } else {
    std::ostringstream s;
    s.precision(17);
    s << *v;
    out.push_back({key, s.str(), 0});
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace selftrap::cli;

  CLI::App app{"Pumped two-level atom in a lossy cavity: quantum trajectories with classical motion"};
  app.set_version_flag("--version", "selftrap 0.1.0");

  std::string command;
  std::optional<std::string> config, figure, out, recoil_model, formats;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_traj, n_max, workers;
  std::optional<double> dt, t_final, x, kappa, gamma, delta, g, detuning, recoil;
  std::vector<std::string> sets;
  bool plot = false;
  bool list_presets = false;

  app.add_option("command", command, "traj | ensemble | steady | spectrum | scan-g | scan-delta")
      ->check(CLI::IsMember({"traj", "ensemble", "steady", "spectrum", "scan-g", "scan-delta"}));
  app.add_option("--config", config, "key = value file or a resolved.json");
  app.add_option("--figure", figure, "figure preset");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--n-traj", n_traj, "ensemble size");
  app.add_option("--dt", dt, "time step, 1/kappa");
  app.add_option("--t-final", t_final, "run length, 1/kappa");
  app.add_option("--out", out, "output directory");
  app.add_option("--x", x, "atom position for steady and spectrum, wavelengths");
  app.add_option("--workers", workers, "worker threads (0: all cores)");
  app.add_option("--kappa", kappa, "cavity decay rate");
  app.add_option("--gamma", gamma, "atomic decay rate, kappa");
  app.add_option("--delta", delta, "pump strength, kappa");
  app.add_option("--g", g, "antinode coupling, kappa");
  app.add_option("--detuning", detuning, "cavity minus atom frequency, kappa");
  app.add_option("--recoil", recoil, "recoil frequency, kappa");
  app.add_option("--n-max", n_max, "Fock cutoff");
  app.add_option("--recoil-model", recoil_model, "none | uniform_pm1 | dipole_projection");
  app.add_option("--format", formats, "csv, json or csv,json");
  app.add_option("--set", sets, "extra key=value setting, repeatable");
  app.add_flag("--plot-script", plot, "also write plot.py");
  app.add_flag("--list-presets", list_presets, "print preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (list_presets) {
    for (const auto& name : preset_names()) std::cout << name << '\n';
    return kExitOk;
  }

  RunSpec spec;
  try {
    ConfigSources src;
    if (!command.empty()) src.command = command;
    src.figure = figure;
    if (config) src.file = read_settings_file(*config);
    auto& o = src.overrides;
    add_override(o, "traj.seed", seed);
    add_override(o, "ensemble.n_traj", n_traj);
    add_override(o, "traj.dt", dt);
    add_override(o, "traj.t_final", t_final);
    add_override(o, "output.dir", out);
    add_override(o, "run.x", x);
    add_override(o, "ensemble.workers", workers);
    add_override(o, "params.kappa", kappa);
    add_override(o, "params.gamma", gamma);
    add_override(o, "params.delta", delta);
    add_override(o, "params.g", g);
    add_override(o, "params.detuning", detuning);
    add_override(o, "params.recoil", recoil);
    add_override(o, "params.n_max", n_max);
    add_override(o, "traj.recoil_model", recoil_model);
    add_override(o, "output.formats", formats);
    if (plot) o.push_back({"output.plot_script", "true", 0});
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError(kv, 0, "--set expects key=value");
      o.push_back({kv.substr(0, eq), kv.substr(eq + 1), 0});
    }
    spec = parse_config(src);
  } catch (const selftrap::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const RunResult r = execute(spec, std::cerr);
  if (r.exit_code != kExitOk) {
    std::cerr << "error: " << r.message << '\n';
  } else {
    for (const auto& f : r.files) std::cerr << "wrote " << f.string() << '\n';
  }
  return r.exit_code;
}
