#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "selftrap/ensemble.hpp"
#include "selftrap/errors.hpp"
#include "selftrap/execute.hpp"
#include "selftrap/liouville.hpp"
#include "selftrap/run_spec.hpp"
#include "selftrap/trajectory.hpp"

namespace py = pybind11;
using namespace selftrap;

namespace {

py::array_t<double> arr(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <class F>
py::array_t<double> column(const std::vector<Observables>& obs, F f) {
  std::vector<double> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(f(o));
  return arr(out);
}

py::dict trajectory_dict(const TrajectoryRecord& r) {
  py::dict d;
  d["t"] = arr(r.t);
  d["n_mean"] = column(r.obs, [](const Observables& o) { return o.n_mean; });
  d["n2_mean"] = column(r.obs, [](const Observables& o) { return o.n2_mean; });
  d["pop_e"] = column(r.obs, [](const Observables& o) { return o.pop_e; });
  d["q"] = arr(r.q);
  d["x"] = arr(r.x);
  d["p"] = arr(r.p);
  d["survival"] = arr(r.survival);
  py::list jumps;
  for (const auto& j : r.jumps) jumps.append(py::make_tuple(j.time, to_string(j.kind), j.momentum_kick));
  d["jumps"] = jumps;
  d["pump_events"] = r.pump_events;
  d["spont_events"] = r.spont_events;
  d["cav_events"] = r.cav_events;
  d["truncation_hits"] = r.truncation_hits;
  return d;
}

py::dict ensemble_dict(const EnsembleStats& e) {
  py::dict d;
  d["t"] = arr(e.t);
  d["n_mean"] = arr(e.n_mean);
  d["n_se"] = arr(e.n_se);
  d["q"] = arr(e.q);
  d["pop_e"] = arr(e.pop_e);
  d["p2_mean"] = arr(e.p2_mean);
  d["t_over_td"] = arr(e.t_over_td);
  d["t_over_td_se"] = arr(e.t_over_td_se);
  d["histogram_x"] = arr(e.histogram.centers);
  d["histogram_density"] = arr(e.histogram.density);
  d["x_rms"] = std::sqrt(e.x2_about_antinode);
  d["antinode_mass"] = e.antinode_mass;
  d["stationary_n_mean"] = e.stationary_n_mean;
  d["stationary_n_se"] = e.stationary_n_se;
  d["stationary_q"] = e.stationary_q;
  d["stationary_pop_e"] = e.stationary_pop_e;
  d["pump_events"] = e.pump_events;
  d["truncation_hits"] = e.truncation_hits;
  d["n_traj"] = e.n_traj;
  d["n_aborted"] = e.n_aborted;
  return d;
}

std::vector<cli::Setting> settings_from(const py::dict& overrides) {
  std::vector<cli::Setting> out;
  for (const auto& [k, v] : overrides) {
    std::string value = py::isinstance<py::str>(v) ? v.cast<std::string>() : py::str(v).cast<std::string>();
    if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
    out.push_back({k.cast<std::string>(), value, 0});
  }
  return out;
}

cli::RunSpec make_spec(std::optional<std::string> command, std::optional<std::string> figure,
                       const py::dict& overrides) {
  cli::ConfigSources src;
  src.command = std::move(command);
  src.figure = std::move(figure);
  src.overrides = settings_from(overrides);
  return cli::parse_config(src);
}

}  // namespace

PYBIND11_MODULE(_selftrap, m) {
  m.doc() = "Pumped two-level atom in a lossy cavity: trajectories and master equation";

  // later registrations are tried first
  py::register_exception<Error>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def(py::init([](double kappa, double gamma, double delta, double g, double detuning, double recoil,
                       int n_max) {
             SystemParams p{kappa, gamma, delta, g, detuning, recoil, n_max};
             p.validate();
             return p;
           }),
           py::arg("kappa") = 1.0, py::arg("gamma") = 0.0, py::arg("delta") = 0.0, py::arg("g") = 0.0,
           py::arg("detuning") = 0.0, py::arg("recoil") = 0.01, py::arg("n_max") = 10)
      .def_readwrite("kappa", &SystemParams::kappa)
      .def_readwrite("gamma", &SystemParams::gamma)
      .def_readwrite("delta", &SystemParams::delta_pump)
      .def_readwrite("g", &SystemParams::g)
      .def_readwrite("detuning", &SystemParams::detuning)
      .def_readwrite("recoil", &SystemParams::recoil)
      .def_readwrite("n_max", &SystemParams::n_max)
      .def("validate", &SystemParams::validate)
      .def("__repr__", [](const SystemParams& p) {
        std::ostringstream os;
        os << "SystemParams(kappa=" << p.kappa << ", gamma=" << p.gamma << ", delta=" << p.delta_pump
           << ", g=" << p.g << ", detuning=" << p.detuning << ", recoil=" << p.recoil << ", n_max=" << p.n_max
           << ")";
        return os.str();
      });

  m.def("presets", &cli::preset_names);
  m.def("known_keys", &cli::known_keys);

  m.def(
      "resolve",
      [](std::optional<std::string> command, std::optional<std::string> figure, const py::dict& overrides) {
        return cli::resolved_json(make_spec(std::move(command), std::move(figure), overrides));
      },
      py::arg("command") = py::none(), py::arg("figure") = py::none(), py::arg("overrides") = py::dict(),
      "Resolved flat configuration as JSON text.");

  m.def(
      "run_trajectory",
      [](std::optional<std::string> figure, const py::dict& overrides) {
        const cli::RunSpec s = make_spec("traj", std::move(figure), overrides);
        TrajectoryRecord r;
        {
          py::gil_scoped_release release;
          r = run_trajectory(s.traj(), s.params);
        }
        return trajectory_dict(r);
      },
      py::arg("figure") = py::none(), py::arg("overrides") = py::dict());

  m.def(
      "run_ensemble",
      [](std::optional<std::string> figure, const py::dict& overrides) {
        const cli::RunSpec s = make_spec("ensemble", std::move(figure), overrides);
        EnsembleStats e;
        {
          py::gil_scoped_release release;
          e = run_ensemble(s.ensemble, s.params);
        }
        return ensemble_dict(e);
      },
      py::arg("figure") = py::none(), py::arg("overrides") = py::dict());

  m.def(
      "steady_state",
      [](const SystemParams& p, double x) {
        p.validate();
        const Superoperator L = build_liouvillian(p, x);
        const DensityMatrix rho = steady_state(L);
        const FieldStats f = field_stats(rho);
        py::dict d;
        d["n_mean"] = f.n_mean;
        d["n2_mean"] = f.n2_mean;
        d["q"] = f.q;
        d["g2_zero"] = f.g2_zero;
        d["pop_e"] = f.pop_e;
        d["delta_n_over_n"] = f.delta_n_over_n;
        d["residual"] = residual_norm(L, rho);
        d["photon_distribution"] = arr(photon_distribution(rho));
        return d;
      },
      py::arg("params"), py::arg("x") = 0.0);

  m.def(
      "evolve",
      [](const SystemParams& p, double x, double t, double dt) {
        p.validate();
        const Superoperator L = build_liouvillian(p, x);
        const FieldStats f = field_stats(evolve_rho(L, fock_density(p.n_max, 0), t, dt));
        return py::make_tuple(f.n_mean, f.n2_mean, f.pop_e);
      },
      py::arg("params"), py::arg("x"), py::arg("t"), py::arg("dt") = 1e-3,
      "(n, n2, pop_e) at time t from the ground state and vacuum.");

  m.def(
      "spectrum",
      [](const SystemParams& p, std::vector<double> omega, double x) {
        p.validate();
        const Spectrum s = emission_spectrum(p, x, omega);
        const SpectrumShape sh = spectrum_shape(s);
        py::dict d;
        d["omega"] = arr(s.omega);
        d["value"] = arr(s.value);
        d["normalized"] = arr(s.normalized);
        d["peak_omega"] = sh.peak_omega;
        d["fwhm"] = sh.fwhm;
        return d;
      },
      py::arg("params"), py::arg("omega"), py::arg("x") = 0.0);

  m.def(
      "run_cli",
      [](const std::string& command, std::optional<std::string> figure, const py::dict& overrides) {
        const cli::RunSpec s = make_spec(command, std::move(figure), overrides);
        std::ostringstream log;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::execute(s, log);
        }
        std::vector<std::string> files;
        for (const auto& f : r.files) files.push_back(f.string());
        return py::make_tuple(r.exit_code, r.message, files);
      },
      py::arg("command"), py::arg("figure") = py::none(), py::arg("overrides") = py::dict(),
      "Runs a command like the command-line tool; returns (exit_code, message, files).");

  m.attr("EXIT_OK") = cli::kExitOk;
  m.attr("EXIT_USAGE") = cli::kExitUsage;
  m.attr("EXIT_NUMERICAL") = cli::kExitNumerical;
}
