// Acceptance run: one PASS/FAIL line per criterion.
//
//   selftrap_acceptance [--only K]...
//
// Exit status is nonzero only when a criterion outside kKnownFailures fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "selftrap/ensemble.hpp"
#include "selftrap/liouville.hpp"
#include "selftrap/model.hpp"
#include "selftrap/run_spec.hpp"
#include "selftrap/trajectory.hpp"

using namespace selftrap;

namespace {

// Criteria whose failure is recorded and tolerated (see README).
const std::set<int> kKnownFailures = {2, 3, 5, 9};

// 1: oracle equivalence
constexpr int kOracleNMax = 10;
constexpr int kOracleTraj = 2000;
constexpr double kOracleTFinal = 5.0;
constexpr double kOracleDt = 1e-3;
constexpr double kOracleSigmas = 3.0;
constexpr double kTopExcitedLimit = 1e-6;
// 2
constexpr double kStartupN = 3.8;
constexpr double kStartupRelTol = 0.15;
constexpr int kStartupTraj = 1000;
// 3
constexpr double kCoolingMaxT = 1.0;
constexpr double kHeatingFactor = 2.0;
constexpr int kCoolingTraj = 1000;
// 4
constexpr double kLocalizationRms = 0.1;
constexpr double kLocalizationRelTol = 0.3;
constexpr double kLocalizationMass = 0.7;
constexpr int kLocalizationTraj = 1000;
// 5
constexpr double kRateBalanceTol = 1e-9;
// 6
constexpr double kSpectrumG = 45.0;
constexpr double kMaxFwhm = 2.0;
// 7
constexpr double kFockQ = -0.8;
constexpr double kFockFraction = 0.8;
// 8
constexpr double kMinOrder = 1.8;
constexpr double kForceRelTol = 1e-6;
constexpr double kExpmTol = 1e-10;
constexpr double kMandelTol = 1e-6;
// 9
constexpr int kAntibunchingNMax = 60;
constexpr double kFrozenG2 = 1.35153412;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SystemParams rates(double gamma, double delta, double detuning, double g, int n_max) {
  SystemParams p;
  p.gamma = gamma;
  p.delta_pump = delta;
  p.detuning = detuning;
  p.g = g;
  p.n_max = n_max;
  return p;
}

cli::RunSpec preset(const char* name) {
  cli::ConfigSources src;
  src.figure = name;
  return cli::parse_config(src);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) s += x;
  const double m = s / v.size();
  for (double x : v) s2 += (x - m) * (x - m);
  return {m, std::sqrt(s2 / (v.size() - 1) / v.size())};
}

// Trajectories and density matrix at fixed x = 0, compared at t_final.
Verdict oracle_at(int n_max, std::string& note) {
  const SystemParams p = [&] {
    SystemParams q = rates(10.0, 20.0, 250.0, 30.0, n_max);
    q.recoil = 0.0;
    return q;
  }();
  TrajectoryConfig c;
  c.dt = kOracleDt;
  c.t_final = kOracleTFinal;
  c.x0 = 0.0;
  c.p0 = 0.0;
  c.recoil_model = RecoilModel::none;
  c.sample_every = static_cast<int>(c.n_steps());
  c.record_jumps = false;
  c.truncation_limit = 1.0;

  std::vector<double> n, n2, pe;
  std::int64_t pumps = 0, hits = 0;
  for (int i = 0; i < kOracleTraj; ++i) {
    c.seed = derive_seed(2024, i);
    const TrajectoryRecord r = run_trajectory(c, p);
    n.push_back(r.obs.back().n_mean);
    n2.push_back(r.obs.back().n2_mean);
    pe.push_back(r.obs.back().pop_e);
    pumps += r.pump_events;
    hits += r.truncation_hits;
  }
  const Superoperator L = build_liouvillian(p, 0.0);
  const DensityMatrix rho = evolve_rho(L, fock_density(n_max, 0), kOracleTFinal, kOracleDt);
  const FieldStats f = field_stats(rho);
  const double top = rho.rho(index_e(n_max, n_max), index_e(n_max, n_max)).real();

  double worst = 0.0;
  std::string d;
  auto cmp = [&](const char* name, const std::vector<double>& v, double ref) {
    const MeanSe m = mean_se(v);
    const double z = std::abs(m.mean - ref) / m.se;
    worst = std::max(worst, z);
    d += fmt(" %s=%.4f+-%.4f(rho %.4f, %.1f se)", name, m.mean, m.se, ref, z);
  };
  cmp("n", n, f.n_mean);
  cmp("pop_e", pe, f.pop_e);
  cmp("n2", n2, f.n2_mean);
  note = fmt("N=%d P(e,N)=%.2e hits/pumps=%.2e", n_max, top, pumps ? double(hits) / pumps : 0.0) + d;
  return {worst <= kOracleSigmas && top < kTopExcitedLimit, ""};
}

Verdict criterion1() {
  std::string note;
  Verdict v = oracle_at(kOracleNMax, note);
  v.detail = note;
  std::string small;
  oracle_at(3, small);
  std::printf("  note: N=3 for reference: %s\n", small.c_str());
  return v;
}

Verdict criterion2() {
  cli::RunSpec s = preset("fig2");
  s.ensemble.n_traj = kStartupTraj;
  const EnsembleStats e = run_ensemble(s.ensemble, s.params);
  const double rel = std::abs(e.stationary_n_mean - kStartupN) / kStartupN;
  return {rel <= kStartupRelTol,
          fmt("plateau n=%.3f+-%.3f over t>=%.0f, target %.1f+-%.0f%%", e.stationary_n_mean,
              e.stationary_n_se, e.window_start, kStartupN, 100 * kStartupRelTol)};
}

Verdict criterion3() {
  cli::RunSpec cool = preset("fig3");
  cool.ensemble.n_traj = kCoolingTraj;
  const EnsembleStats c = run_ensemble(cool.ensemble, cool.params);
  cli::RunSpec heat = preset("fig3-heating");
  heat.ensemble.n_traj = kCoolingTraj;
  const EnsembleStats h = run_ensemble(heat.ensemble, heat.params);
  const double t_end = c.t_over_td.back();
  const double ratio = h.p2_mean.back() / h.p2_mean.front();
  const bool a = t_end < kCoolingMaxT;
  const bool b = ratio >= kHeatingFactor;
  return {a && b, fmt("(a) Delta=+250: T/T_D %.3f -> %.3f+-%.3f, need < %.1f [%s]; "
                      "(b) Delta=-250: p2 %.1f -> %.1f, ratio %.2f, need >= %.1f [%s]",
                      c.t_over_td.front(), t_end, c.t_over_td_se.back(), kCoolingMaxT, a ? "ok" : "fail",
                      h.p2_mean.front(), h.p2_mean.back(), ratio, kHeatingFactor, b ? "ok" : "fail")};
}

Verdict criterion4() {
  cli::RunSpec s60 = preset("fig4");
  s60.ensemble.n_traj = kLocalizationTraj;
  const EnsembleStats a = run_ensemble(s60.ensemble, s60.params);
  cli::RunSpec s80 = preset("fig4-d80");
  s80.ensemble.n_traj = kLocalizationTraj;
  const EnsembleStats b = run_ensemble(s80.ensemble, s80.params);
  const double r60 = std::sqrt(a.x2_about_antinode);
  const double r80 = std::sqrt(b.x2_about_antinode);
  const bool ok = std::abs(r60 - kLocalizationRms) <= kLocalizationRelTol * kLocalizationRms && r80 < r60 &&
                  a.antinode_mass >= kLocalizationMass;
  return {ok, fmt("x_rms(delta=60)=%.4f, x_rms(delta=80)=%.4f, mass(|x|<0.15)=%.3f/%.3f", r60, r80,
                  a.antinode_mass, b.antinode_mass)};
}

Verdict criterion5() {
  const cli::RunSpec s = preset("fig1");
  const std::vector<ScanPoint> pts = fixed_g_scan(s.params, s.scan_values);
  auto at = [&](double g) {
    for (const auto& p : pts)
      if (p.value == g) return p;
    throw std::runtime_error("g not on grid");
  };
  const double pe0 = at(0.0).pop_e;
  const double balance = s.params.delta_pump / (s.params.delta_pump + s.params.gamma);
  bool mono = true;
  for (std::size_t k = 1; k < pts.size(); ++k) mono = mono && pts[k].n_mean > pts[k - 1].n_mean;
  int arg = -1, first = -1, last = -1;
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    if (!std::isfinite(pts[k].delta_n_over_n)) continue;
    if (first < 0) first = k;
    last = k;
    if (arg < 0 || pts[k].delta_n_over_n > pts[arg].delta_n_over_n) arg = k;
  }
  const bool interior = arg > first && arg < last;
  const bool rate = std::abs(pe0 - balance) < kRateBalanceTol;
  const bool thresh = at(45.0).n_mean > 1.0 && at(5.0).n_mean < 1.0;
  int q_arg = first;
  for (int k = first; k <= last; ++k)
    if (std::isfinite(pts[k].q) && pts[k].q > pts[q_arg].q) q_arg = k;
  return {rate && thresh && mono && interior,
          fmt("pop_e(0)=%.12f vs %.12f [%s]; n(5)=%.4f n(45)=%.4f [%s]; monotone [%s]; "
              "max dn/n=%.3f at g=%.1f [%s] (Q peaks at g=%.1f)",
              pe0, balance, rate ? "ok" : "fail", at(5.0).n_mean, at(45.0).n_mean, thresh ? "ok" : "fail",
              mono ? "ok" : "fail", pts[arg].delta_n_over_n, pts[arg].value, interior ? "ok" : "fail",
              pts[q_arg].value)};
}

Verdict criterion6() {
  const cli::RunSpec s = preset("fig1");
  SystemParams p = s.params;
  p.g = kSpectrumG;
  const Superoperator L = build_liouvillian(p, 0.0);
  const DensityMatrix rho = steady_state(L);
  // 1 kappa steps to locate the peak, then 0.01 kappa around it
  const Spectrum coarse = emission_spectrum(L, rho, linspace(s.spectrum.omega_min, s.spectrum.omega_max, 351));
  const double w0 = spectrum_shape(coarse).peak_omega;
  const Spectrum fine = emission_spectrum(L, rho, linspace(w0 - 5.0, w0 + 5.0, 1001));
  const SpectrumShape sh = spectrum_shape(fine);
  const double atom = -p.detuning;
  return {sh.peak_omega > atom && sh.fwhm < kMaxFwhm,
          fmt("peak at omega=%.3f (atom at %.1f), FWHM=%.4f, need < %.1f", sh.peak_omega, atom, sh.fwhm, kMaxFwhm)};
}

Verdict criterion7() {
  const cli::RunSpec s = preset("fig5");
  const TrajectoryRecord r = run_trajectory(s.traj(), s.params);
  int lit = 0, fock = 0;
  for (std::size_t k = 0; k < r.obs.size(); ++k) {
    if (r.obs[k].n_mean < 1.0) continue;
    ++lit;
    if (r.q[k] < kFockQ) ++fock;
  }
  const double frac = lit ? double(fock) / lit : 0.0;
  return {lit > 0 && frac >= kFockFraction,
          fmt("%d of %d samples with n>=1 have q<%.1f (%.1f%%), seed %llu", fock, lit, kFockQ, 100 * frac,
              static_cast<unsigned long long>(s.traj().seed))};
}

Verdict criterion8() {
  const cplx i{0.0, 1.0};
  const SystemParams p = rates(10.0, 20.0, 250.0, 30.0, 5);
  std::mt19937_64 rng(8);

  // (a)
  double min_order = 1e9;
  for (int trial = 0; trial < 5; ++trial) {
    const QuantumState s = oracle::random_state(5, rng);
    const JumpProbabilities unit = jump_probabilities(s, 1e-6, p);
    std::vector<double> res;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
      const double loss = 1.0 - heff_step(s, 0.07, dt, p).norm2();
      res.push_back(std::abs(loss - unit.total() * dt / 1e-6));
    }
    min_order = std::min({min_order, std::log10(res[0] / res[1]), std::log10(res[1] / res[2])});
  }
  const bool a = min_order > kMinOrder;

  // (b)
  double force_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Vec v = oracle::to_vec(oracle::random_state(5, rng));
    const QuantumState s = oracle::from_vec(5, v);
    auto energy = [&](double x) { return (v.adjoint() * oracle::heff_layout(p, x) * v)(0, 0).real(); };
    const double x = 0.125, h = 1e-6;
    const double fd = -(energy(x + h) - energy(x - h)) / (2.0 * h) / kTwoPi;
    force_err = std::max(force_err, std::abs(force(s, x, p) - fd) / std::abs(fd));
  }
  const bool b = force_err < kForceRelTol;

  // (c)
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  double expm_err = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n_max = 1 + trial % 5;
    SystemParams q = rates(20.0 * ud(rng), 40.0 * ud(rng), 500.0 * ud(rng) - 250.0, 80.0 * ud(rng), n_max);
    const double x = ud(rng);
    const double dt = std::pow(10.0, -1.0 - 3.0 * ud(rng));
    const QuantumState s = oracle::random_state(n_max, rng);
    const oracle::Vec ref = (-i * dt * oracle::heff_layout(q, x)).exp() * oracle::to_vec(s);
    expm_err = std::max(expm_err, (oracle::to_vec(heff_step(s, x, dt, q)) - ref).cwiseAbs().maxCoeff());
  }
  const bool c = expm_err < kExpmTol;

  // (d)
  const Observables fo = observables(QuantumState::ground_fock(10, 4));
  const double q_fock = mandel_q(fo.n_mean, fo.n2_mean);
  const double q_fock_rho = field_stats(fock_density(10, 4)).q;
  const double q_coh = field_stats(coherent_density(60, {1.5, -1.2})).q;
  const bool d = std::abs(q_fock + 1.0) < kMandelTol && std::abs(q_fock_rho + 1.0) < kMandelTol &&
                 std::abs(q_coh) < kMandelTol;

  // (e)
  EnsembleConfig ec;
  ec.base.dt = 4e-4;
  ec.base.t_final = 2.0;
  ec.base.seed = 99;
  ec.base.p0_spread = 15.0;
  ec.base.sample_every = 25;
  ec.n_traj = 24;
  SystemParams lp = rates(10.0, 60.0, 250.0, 50.0, 30);
  std::vector<EnsembleStats> runs;
  for (int w : {1, 2, 5, 1}) {
    ec.workers = w;
    runs.push_back(run_ensemble(ec, lp));
  }
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
  };
  bool e = true;
  for (const auto& r : runs)
    e = e && same(r.n_mean, runs[0].n_mean) && same(r.q, runs[0].q) && same(r.p2_mean, runs[0].p2_mean) &&
        same(r.histogram.density, runs[0].histogram.density) && r.pump_events == runs[0].pump_events;

  auto tag = [](bool ok) { return ok ? "ok" : "fail"; };
  return {a && b && c && d && e,
          fmt("(a) order %.2f [%s] (b) rel err %.1e [%s] (c) max err %.1e [%s] "
              "(d) Q fock %.2e/%.2e coherent %.1e [%s] (e) workers 1,2,5 + rerun [%s]",
              min_order, tag(a), force_err, tag(b), expm_err, tag(c), q_fock, q_fock_rho, q_coh, tag(d), tag(e))};
}

Verdict criterion9() {
  const SystemParams p = rates(10.0, 20.0, 250.0, 100.0, kAntibunchingNMax);
  const DensityMatrix rho = steady_state(build_liouvillian(p, 0.0));
  const FieldStats f = field_stats(rho);
  return {f.g2_zero < 1.0, fmt("g2(0)=%.8f (frozen %.8f, drift %.1e), n=%.4f, Q=%.4f", f.g2_zero, kFrozenG2,
                               std::abs(f.g2_zero - kFrozenG2), f.n_mean, f.q)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k + 1 < argc; k += 2)
    if (std::string(argv[k]) == "--only") only.insert(std::atoi(argv[k + 1]));

  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3,
                                                          criterion4, criterion5, criterion6,
                                                          criterion7, criterion8, criterion9};
  int unexpected = 0;
  for (int k = 1; k <= 9; ++k) {
    if (!only.empty() && !only.count(k)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k - 1]();
    } catch (const std::exception& ex) {
      v = {false, std::string("error: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = kKnownFailures.count(k) > 0;
    std::printf("criterion %d: %s%s  %s  (%.1fs)\n", k, v.pass ? "PASS" : "FAIL",
                !v.pass && known ? " (known)" : "", v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
