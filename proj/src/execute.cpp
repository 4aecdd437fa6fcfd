#include "selftrap/execute.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "selftrap/ensemble.hpp"
#include "selftrap/liouville.hpp"
#include "selftrap/trajectory.hpp"

namespace selftrap::cli {

namespace {

using nlohmann::json;
using Columns = std::vector<std::vector<double>>;

const std::map<std::string, std::vector<std::string>>& schemas() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"timeseries.csv", {"t", "n_mean", "n_se", "Q", "pop_e", "T_over_TD", "T_se"}},
      {"histogram.csv", {"x_over_lambda", "density"}},
      {"spectrum.csv", {"omega_over_kappa", "S_normalized"}},
      {"scan.csv", {"scan_var", "n_mean", "Q", "pop_e"}},
      {"trajectory.csv", {"t", "n_mean", "n2_mean", "q", "pop_e", "x", "p", "survival"}},
      {"jumps.csv", {"t", "kind", "momentum_kick"}},
  };
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Writer {
 public:
  Writer(const RunSpec& spec, RunResult& result) : spec_(spec), result_(result) {}

  void table(const std::string& file, const Columns& cols) {
    const auto& header = schemas().at(file);
    if (spec_.output.csv) {
      std::ofstream out = open(file);
      for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
      out << '\n';
      const std::size_t rows = cols.empty() ? 0 : cols.front().size();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << fmt(cols[c][r]);
        out << '\n';
      }
    }
    if (spec_.output.json) {
      json t = json::object();
      for (std::size_t c = 0; c < header.size(); ++c) t[header[c]] = cols[c];
      tables_[file.substr(0, file.find('.'))] = std::move(t);
    }
  }

  void text(const std::string& file, const std::string& content) { open(file) << content; }

  void finish() {
    if (spec_.output.json) text("results.json", tables_.dump(1) + "\n");
  }

 private:
  std::ofstream open(const std::string& file) {
    const auto path = spec_.output.dir / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("output.dir: cannot write '" + path.string() + "'");
    result_.files.push_back(path);
    return out;
  }

  const RunSpec& spec_;
  RunResult& result_;
  json tables_ = json::object();
};

json truncation_json(std::int64_t pump, std::int64_t hits, double limit) {
  const double ratio = pump > 0 ? static_cast<double>(hits) / static_cast<double>(pump) : 0.0;
  return {{"pump_events", pump}, {"truncation_hits", hits}, {"ratio", ratio}, {"limit", limit},
          {"valid", ratio <= limit}};
}

json run_traj(const RunSpec& spec, Writer& w, std::ostream& log) {
  log << "traj: t_final=" << spec.traj().t_final << " dt=" << spec.traj().dt << '\n';
  const TrajectoryRecord rec = run_trajectory(spec.traj(), spec.params);
  const std::size_t s = rec.t.size();
  Columns ts(7, std::vector<double>(s));
  Columns tr(8, std::vector<double>(s));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < s; ++k) {
    const Observables& o = rec.obs[k];
    const double temp = temperature_ratio(rec.p[k] * rec.p[k], spec.params);
    const double row_ts[] = {rec.t[k], o.n_mean, nan, rec.q[k], o.pop_e, temp, nan};
    const double row_tr[] = {rec.t[k], o.n_mean, o.n2_mean, rec.q[k], o.pop_e, rec.x[k], rec.p[k], rec.survival[k]};
    for (std::size_t c = 0; c < 7; ++c) ts[c][k] = row_ts[c];
    for (std::size_t c = 0; c < 8; ++c) tr[c][k] = row_tr[c];
  }
  w.table("timeseries.csv", ts);
  w.table("trajectory.csv", tr);
  if (spec.output.csv) {
    std::string jumps = "t,kind,momentum_kick\n";
    for (const JumpEvent& j : rec.jumps) {
      jumps += fmt(j.time) + "," + to_string(j.kind) + "," + fmt(j.momentum_kick) + "\n";
    }
    w.text("jumps.csv", jumps);
  }
  double n_sum = 0.0;
  for (const Observables& o : rec.obs) n_sum += o.n_mean;
  return {{"seeds", {spec.traj().seed}},
          {"truncation", truncation_json(rec.pump_events, rec.truncation_hits, spec.traj().truncation_limit)},
          {"summary",
           {{"time_averaged_n", n_sum / static_cast<double>(s)},
            {"pump_events", rec.pump_events},
            {"spont_events", rec.spont_events},
            {"cav_events", rec.cav_events}}}};
}

json run_ens(const RunSpec& spec, Writer& w, std::ostream& log) {
  log << "ensemble: " << spec.ensemble.n_traj << " trajectories, t_final=" << spec.traj().t_final << '\n';
  const EnsembleStats st = run_ensemble(spec.ensemble, spec.params);
  w.table("timeseries.csv", {st.t, st.n_mean, st.n_se, st.q, st.pop_e, st.t_over_td, st.t_over_td_se});
  w.table("histogram.csv", {st.histogram.centers, st.histogram.density});
  return {{"seeds", st.seeds},
          {"truncation", truncation_json(st.pump_events, st.truncation_hits, spec.traj().truncation_limit)},
          {"summary",
           {{"n_traj", st.n_traj},
            {"n_aborted", st.n_aborted},
            {"abort_messages", st.abort_messages},
            {"window_start", st.window_start},
            {"stationary_n_mean", st.stationary_n_mean},
            {"stationary_n_se", st.stationary_n_se},
            {"stationary_q", st.stationary_q},
            {"stationary_pop_e", st.stationary_pop_e},
            {"x_rms_about_antinode", std::sqrt(st.x2_about_antinode)},
            {"antinode_mass", st.antinode_mass},
            {"final_T_over_TD", st.t_over_td.back()},
            {"final_p2", st.p2_mean.back()},
            {"initial_p2", st.p2_mean.front()},
            {"pump_rate", st.pump_rate},
            {"spont_rate", st.spont_rate},
            {"cav_rate", st.cav_rate}}}};
}

json run_steady(const RunSpec& spec, Writer& w, std::ostream& log) {
  std::vector<double> values = spec.scan_values;
  if (spec.command == Command::steady && values.empty()) values.push_back(spec.params.g);
  log << "steady: " << values.size() << " coupling value(s) at x=" << spec.position << '\n';
  Columns cols(4);
  json points = json::array();
  for (double g : values) {
    SystemParams p = spec.params;
    p.g = g;
    const Superoperator L = build_liouvillian(p, spec.position);
    const DensityMatrix rho = steady_state(L);
    const FieldStats f = field_stats(rho);
    const double row[] = {g, f.n_mean, f.q, f.pop_e};
    for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(row[c]);
    points.push_back({{"g", g},
                      {"n_mean", f.n_mean},
                      {"q", f.q},
                      {"g2_zero", f.g2_zero},
                      {"pop_e", f.pop_e},
                      {"delta_n_over_n", f.delta_n_over_n},
                      {"residual", residual_norm(L, rho)},
                      {"top_fock_weight", photon_distribution(rho).back()}});
  }
  w.table("scan.csv", cols);
  return {{"summary", {{"scan_var", "g"}, {"x", spec.position}, {"points", points}}}};
}

json run_spectrum(const RunSpec& spec, Writer& w, std::ostream& log) {
  const std::vector<double> grid = linspace(spec.spectrum.omega_min, spec.spectrum.omega_max, spec.spectrum.points);
  log << "spectrum: " << grid.size() << " frequencies at x=" << spec.position << '\n';
  const Superoperator L = build_liouvillian(spec.params, spec.position);
  const DensityMatrix rho = steady_state(L);
  const Spectrum s = emission_spectrum(L, rho, grid);
  w.table("spectrum.csv", {s.omega, s.normalized});
  const SpectrumShape shape = spectrum_shape(s);
  return {{"summary",
           {{"peak_omega", shape.peak_omega},
            {"peak_value", shape.peak_value},
            {"fwhm", shape.fwhm},
            {"atomic_omega", -spec.params.detuning},
            {"weight", spectrum_weight(s)},
            {"n_mean", field_stats(rho).n_mean}}}};
}

json run_pump_scan(const RunSpec& spec, Writer& w, std::ostream& log) {
  log << "scan-delta: " << spec.scan_values.size() << " pump values, " << spec.ensemble.n_traj
      << " trajectories each\n";
  const std::vector<ScanPoint> pts = pump_scan(spec.params, spec.scan_values, spec.ensemble);
  Columns cols(4);
  json points = json::array();
  for (const ScanPoint& p : pts) {
    const double row[] = {p.value, p.n_mean, p.q, p.pop_e};
    for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(row[c]);
    points.push_back({{"delta", p.value}, {"n_mean", p.n_mean}, {"q", p.q}, {"delta_n_over_n", p.delta_n_over_n}});
  }
  w.table("scan.csv", cols);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < spec.ensemble.n_traj; ++i) seeds.push_back(derive_seed(spec.traj().seed, i));
  return {{"seeds", seeds}, {"summary", {{"scan_var", "delta"}, {"points", points}}}};
}

std::string plot_script(const RunSpec& spec) {
  std::string s =
      "#!/usr/bin/env python3\n"
      "import os\n"
      "import sys\n\n"
      "import matplotlib\n"
      "matplotlib.use(\"Agg\")\n"
      "import matplotlib.pyplot as plt\n"
      "import numpy as np\n\n"
      "here = os.path.dirname(os.path.abspath(__file__))\n\n\n"
      "def load(name):\n"
      "    return np.genfromtxt(os.path.join(here, name), delimiter=\",\", names=True)\n\n\n";
  switch (spec.command) {
    case Command::traj:
    case Command::ensemble:
      s +=
          "d = load(\"timeseries.csv\")\n"
          "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
          "ax[0].plot(d[\"t\"], d[\"n_mean\"], label=\"n\")\n"
          "ax[0].plot(d[\"t\"], d[\"Q\"], label=\"Q\")\n"
          "ax[0].set_xlabel(\"kappa t\")\n"
          "ax[0].legend()\n"
          "ax[1].plot(d[\"t\"], d[\"T_over_TD\"])\n"
          "ax[1].set_xlabel(\"kappa t\")\n"
          "ax[1].set_ylabel(\"T / T_D\")\n";
      if (spec.command == Command::ensemble) {
        s +=
            "fig.tight_layout()\n"
            "fig.savefig(os.path.join(here, \"timeseries.png\"))\n"
            "h = load(\"histogram.csv\")\n"
            "fig, ax = plt.subplots(figsize=(4.5, 3.5))\n"
            "ax.plot(h[\"x_over_lambda\"], h[\"density\"])\n"
            "ax.set_xlabel(\"x / lambda\")\n"
            "ax.set_ylabel(\"p(x)\")\n"
            "fig.tight_layout()\n"
            "fig.savefig(os.path.join(here, \"histogram.png\"))\n";
      } else {
        s +=
            "fig.tight_layout()\n"
            "fig.savefig(os.path.join(here, \"timeseries.png\"))\n";
      }
      break;
    case Command::spectrum:
      s +=
          "d = load(\"spectrum.csv\")\n"
          "fig, ax = plt.subplots(figsize=(4.5, 3.5))\n"
          "ax.plot(d[\"omega_over_kappa\"], d[\"S_normalized\"])\n"
          "ax.set_xlabel(\"omega / kappa\")\n"
          "ax.set_ylabel(\"S / S_max\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(os.path.join(here, \"spectrum.png\"))\n";
      break;
    case Command::steady:
    case Command::scan_g:
    case Command::scan_delta:
      s += std::string("d = load(\"scan.csv\")\n") +
           "fig, ax = plt.subplots(figsize=(4.5, 3.5))\n"
           "ax.plot(d[\"scan_var\"], d[\"n_mean\"], \"o-\", label=\"n\")\n"
           "ax.plot(d[\"scan_var\"], d[\"Q\"], \"s-\", label=\"Q\")\n"
           "ax.set_xlabel(\"" + (spec.command == Command::scan_delta ? "delta" : "g") + " / kappa\")\n"
           "ax.legend()\n"
           "fig.tight_layout()\n"
           "fig.savefig(os.path.join(here, \"scan.png\"))\n";
      break;
  }
  s += "if \"--show\" in sys.argv:\n    plt.show()\n";
  return s;
}

}  // namespace

std::vector<std::string> csv_columns(const std::string& file) {
  const auto it = schemas().find(file);
  if (it == schemas().end()) throw InvalidArgument("no CSV schema for '" + file + "'");
  return it->second;
}

RunResult execute(const RunSpec& spec, std::ostream& log) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  json meta = {{"version", "0.1.0"},
               {"schema_version", kSchemaVersion},
               {"command", to_string(spec.command)},
               {"figure", spec.figure}};
  try {
    std::filesystem::create_directories(spec.output.dir);
    Writer w(spec, result);
    w.text("resolved.json", resolved_json(spec));

    json body;
    switch (spec.command) {
      case Command::traj:
        body = run_traj(spec, w, log);
        break;
      case Command::ensemble:
        body = run_ens(spec, w, log);
        break;
      case Command::steady:
      case Command::scan_g:
        body = run_steady(spec, w, log);
        break;
      case Command::spectrum:
        body = run_spectrum(spec, w, log);
        break;
      case Command::scan_delta:
        body = run_pump_scan(spec, w, log);
        break;
    }
    if (spec.output.plot_script) w.text("plot.py", plot_script(spec));
    w.finish();

    for (auto it = body.begin(); it != body.end(); ++it) meta[it.key()] = it.value();
    json columns = json::object();
    for (const auto& path : result.files) {
      const std::string name = path.filename().string();
      if (schemas().count(name)) columns[name] = schemas().at(name);
    }
    meta["columns"] = columns;
  } catch (const InvalidArgument& e) {
    result.exit_code = kExitUsage;
    result.message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = kExitUsage;
    result.message = e.what();
  } catch (const std::exception& e) {
    // StepTooCoarse, TruncationError, NumericalError and ensemble aborts.
    result.exit_code = kExitNumerical;
    result.message = e.what();
  }

  meta["exit_code"] = result.exit_code;
  if (result.exit_code != kExitOk) meta["error"] = result.message;
  meta["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(spec.output.dir / "meta.json", std::ios::binary);
  if (out) {
    out << meta.dump(1) << '\n';
    result.files.push_back(spec.output.dir / "meta.json");
  }
  return result;
}

}  // namespace selftrap::cli
