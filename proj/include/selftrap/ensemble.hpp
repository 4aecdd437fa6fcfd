#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selftrap/params.hpp"
#include "selftrap/trajectory.hpp"

namespace selftrap {

struct EnsembleConfig {
  TrajectoryConfig base;
  int n_traj = 1000;
  int workers = 0;  // 0: hardware concurrency
  int histogram_bins = 100;
  /// Start of the stationary window; negative selects the last 25% of the run.
  double window_start = -1.0;
  double antinode_radius = 0.15;  // wavelengths
  /// Largest tolerated fraction of aborted trajectories.
  double max_abort_fraction = 0.01;

  double resolved_window_start() const;
  void validate() const;
};

struct Histogram {
  std::vector<double> centers;  // x / lambda in [-0.5, 0.5)
  std::vector<double> density;  // sum(density) * width == 1
  double width = 0.0;
};

struct EnsembleStats {
  std::vector<double> t;
  std::vector<double> n_mean, n_se;
  std::vector<double> q, q_se;  // pooled ensemble moments
  std::vector<double> pop_e, pop_e_se;
  std::vector<double> p2_mean, p2_se;
  std::vector<double> t_over_td, t_over_td_se;  // NaN when gamma == 0

  Histogram histogram;
  /// <d^2> with d the distance to the nearest antinode, over the stationary window.
  double x2_about_antinode = 0.0;
  double antinode_mass = 0.0;  // fraction with |d| < antinode_radius

  // Stationary window, pooled over samples and trajectories.
  double window_start = 0.0;
  double stationary_n_mean = 0.0;
  double stationary_n_se = 0.0;
  double stationary_q = 0.0;
  double stationary_pop_e = 0.0;

  // Jump rates per trajectory per unit time.
  double pump_rate = 0.0;
  double spont_rate = 0.0;
  double cav_rate = 0.0;
  std::int64_t pump_events = 0;
  std::int64_t truncation_hits = 0;

  int n_traj = 0;
  int n_aborted = 0;
  std::vector<std::string> abort_messages;
  std::vector<std::uint64_t> seeds;
};

/// T / T_D for <p^2> in (hbar k)^2 with k_B T = m <v^2> and k_B T_D = hbar gamma / 2.
double temperature_ratio(double p2_mean, const SystemParams& params) noexcept;

/// Signed distance (wavelengths) from x to the nearest antinode (multiples of lambda/2).
double antinode_offset(double x) noexcept;

/// Runs n_traj trajectories with seeds derive_seed(base.seed, i) on a worker
/// pool and reduces them in index order, so results do not depend on the
/// worker count. Throws Error when more than max_abort_fraction of
/// trajectories abort.
EnsembleStats run_ensemble(const EnsembleConfig& config, const SystemParams& params);

struct ScanPoint {
  double value = 0.0;
  double n_mean = 0.0;
  double q = 0.0;
  double pop_e = 0.0;
  double delta_n_over_n = 0.0;
};

/// Stationary n, Q and pop_e of trajectory ensembles for each pump strength.
std::vector<ScanPoint> pump_scan(const SystemParams& params, std::span<const double> delta_values,
                                 const EnsembleConfig& config);

/// Steady state at the antinode (x = 0) for each coupling strength.
std::vector<ScanPoint> fixed_g_scan(const SystemParams& params, std::span<const double> g_values);

}  // namespace selftrap
