#include "selftrap/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "selftrap/errors.hpp"
#include "selftrap/liouville.hpp"

namespace selftrap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sampled series of one trajectory, kept until the ordered reduction.
struct Compact {
  std::vector<double> n, n2, pop_e, x, p;
  std::int64_t pump = 0, spont = 0, cav = 0, truncation_hits = 0;
  bool ok = false;
  std::string error;
};

Compact compress(TrajectoryRecord&& rec) {
  Compact c;
  const std::size_t s = rec.t.size();
  c.n.reserve(s);
  c.n2.reserve(s);
  c.pop_e.reserve(s);
  for (const Observables& o : rec.obs) {
    c.n.push_back(o.n_mean);
    c.n2.push_back(o.n2_mean);
    c.pop_e.push_back(o.pop_e);
  }
  c.x = std::move(rec.x);
  c.p = std::move(rec.p);
  c.pump = rec.pump_events;
  c.spont = rec.spont_events;
  c.cav = rec.cav_events;
  c.truncation_hits = rec.truncation_hits;
  c.ok = true;
  return c;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

template <typename Get>
MeanSe mean_se(const std::vector<const Compact*>& runs, Get get) {
  const double m = static_cast<double>(runs.size());
  double s = 0.0;
  for (const Compact* c : runs) s += get(*c);
  const double mean = s / m;
  double v = 0.0;
  for (const Compact* c : runs) {
    const double d = get(*c) - mean;
    v += d * d;
  }
  const double se = runs.size() > 1 ? std::sqrt(v / (m - 1.0) / m) : kNaN;
  return {mean, se};
}

}  // namespace

double EnsembleConfig::resolved_window_start() const {
  return window_start < 0.0 ? 0.75 * base.t_final : window_start;
}

void EnsembleConfig::validate() const {
  base.validate();
  if (n_traj < 1) throw InvalidArgument("ensemble.n_traj must be >= 1");
  if (workers < 0) throw InvalidArgument("ensemble.workers must be >= 0");
  if (histogram_bins < 1) throw InvalidArgument("ensemble.bins must be >= 1");
  const double w = resolved_window_start();
  if (!(w >= 0.0 && w <= base.t_final)) {
    throw InvalidArgument("ensemble.window_start must lie within [0, traj.t_final]");
  }
  if (!(antinode_radius > 0.0 && antinode_radius <= 0.25)) {
    throw InvalidArgument("ensemble.antinode_radius must lie in (0, 0.25]");
  }
}

double temperature_ratio(double p2_mean, const SystemParams& params) noexcept {
  if (!(params.gamma > 0.0)) return kNaN;
  return 4.0 * params.recoil * p2_mean / params.gamma;
}

double antinode_offset(double x) noexcept { return x - 0.5 * std::nearbyint(2.0 * x); }

EnsembleStats run_ensemble(const EnsembleConfig& config, const SystemParams& params) {
  config.validate();
  params.validate();

  const auto n_traj = static_cast<std::size_t>(config.n_traj);
  std::vector<Compact> runs(n_traj);
  EnsembleStats stats;
  stats.seeds.resize(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) stats.seeds[i] = derive_seed(config.base.seed, i);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1)) {
      TrajectoryConfig tc = config.base;
      tc.seed = stats.seeds[i];
      tc.record_jumps = false;
      try {
        runs[i] = compress(run_trajectory(tc, params));
      } catch (const std::exception& e) {
        runs[i].ok = false;
        runs[i].error = e.what();
      }
    }
  };
  unsigned n_workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(n_traj));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  // Ordered reduction from here on.
  std::vector<const Compact*> good;
  for (const Compact& c : runs) {
    if (c.ok) {
      good.push_back(&c);
    } else {
      ++stats.n_aborted;
      if (stats.abort_messages.size() < 10) stats.abort_messages.push_back(c.error);
    }
  }
  stats.n_traj = static_cast<int>(good.size());
  if (good.empty() || static_cast<double>(stats.n_aborted) > config.max_abort_fraction * config.n_traj) {
    throw Error(std::to_string(stats.n_aborted) + " of " + std::to_string(config.n_traj) +
                " trajectories aborted; first error: " +
                (stats.abort_messages.empty() ? std::string("none") : stats.abort_messages.front()));
  }

  const double dt = config.base.dt;
  const std::size_t n_samples = good.front()->n.size();
  const double m = static_cast<double>(good.size());
  for (std::size_t k = 0; k < n_samples; ++k) {
    stats.t.push_back(static_cast<double>(k) * config.base.sample_every * dt);

    const MeanSe n = mean_se(good, [k](const Compact& c) { return c.n[k]; });
    const MeanSe n2 = mean_se(good, [k](const Compact& c) { return c.n2[k]; });
    const MeanSe pe = mean_se(good, [k](const Compact& c) { return c.pop_e[k]; });
    const MeanSe p2 = mean_se(good, [k](const Compact& c) { return c.p[k] * c.p[k]; });
    stats.n_mean.push_back(n.mean);
    stats.n_se.push_back(n.se);
    stats.pop_e.push_back(pe.mean);
    stats.pop_e_se.push_back(pe.se);
    stats.p2_mean.push_back(p2.mean);
    stats.p2_se.push_back(p2.se);
    stats.t_over_td.push_back(temperature_ratio(p2.mean, params));
    stats.t_over_td_se.push_back(temperature_ratio(p2.se, params));

    // Q from pooled moments; jackknife standard error.
    const double q = mandel_q(n.mean, n2.mean);
    stats.q.push_back(q);
    if (good.size() > 1 && std::isfinite(q)) {
      const double s1 = n.mean * m;
      const double s2 = n2.mean * m;
      double acc = 0.0;
      double acc2 = 0.0;
      for (const Compact* c : good) {
        const double qi = mandel_q((s1 - c->n[k]) / (m - 1.0), (s2 - c->n2[k]) / (m - 1.0));
        acc += qi;
        acc2 += qi * qi;
      }
      const double mean_q = acc / m;
      const double var = std::max(0.0, acc2 / m - mean_q * mean_q);
      stats.q_se.push_back(std::sqrt((m - 1.0) * var));
    } else {
      stats.q_se.push_back(kNaN);
    }
  }

  // Stationary window.
  const double t0 = config.resolved_window_start();
  stats.window_start = t0;
  std::size_t k0 = 0;
  while (k0 < stats.t.size() && stats.t[k0] < t0 - 1e-12) ++k0;
  const auto bins = static_cast<std::size_t>(config.histogram_bins);
  std::vector<double> counts(bins, 0.0);
  double pooled_n = 0.0;
  double pooled_n2 = 0.0;
  double pooled_pe = 0.0;
  double d2 = 0.0;
  double near = 0.0;
  double total = 0.0;
  std::vector<double> traj_window_n;
  traj_window_n.reserve(good.size());
  for (const Compact* c : good) {
    double tn = 0.0;
    for (std::size_t k = k0; k < n_samples; ++k) {
      pooled_n += c->n[k];
      pooled_n2 += c->n2[k];
      pooled_pe += c->pop_e[k];
      tn += c->n[k];
      const double wrapped = c->x[k] - std::floor(c->x[k] + 0.5);
      auto b = static_cast<std::size_t>((wrapped + 0.5) * static_cast<double>(bins));
      counts[std::min(b, bins - 1)] += 1.0;
      const double d = antinode_offset(c->x[k]);
      d2 += d * d;
      if (std::abs(d) < config.antinode_radius) near += 1.0;
      total += 1.0;
    }
    traj_window_n.push_back(tn / static_cast<double>(n_samples - k0));
  }
  if (total > 0.0) {
    stats.stationary_n_mean = pooled_n / total;
    stats.stationary_q = mandel_q(pooled_n / total, pooled_n2 / total);
    stats.stationary_pop_e = pooled_pe / total;
    stats.x2_about_antinode = d2 / total;
    stats.antinode_mass = near / total;
    double v = 0.0;
    for (double tn : traj_window_n) v += (tn - stats.stationary_n_mean) * (tn - stats.stationary_n_mean);
    stats.stationary_n_se = good.size() > 1 ? std::sqrt(v / (m - 1.0) / m) : kNaN;
  }
  Histogram& h = stats.histogram;
  h.width = 1.0 / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    h.centers.push_back(-0.5 + (static_cast<double>(b) + 0.5) * h.width);
    h.density.push_back(total > 0.0 ? counts[b] / (total * h.width) : 0.0);
  }

  std::int64_t pump = 0, spont = 0, cav = 0;
  for (const Compact* c : good) {
    pump += c->pump;
    spont += c->spont;
    cav += c->cav;
    stats.truncation_hits += c->truncation_hits;
  }
  stats.pump_events = pump;
  const double exposure = m * static_cast<double>(config.base.n_steps()) * dt;
  stats.pump_rate = static_cast<double>(pump) / exposure;
  stats.spont_rate = static_cast<double>(spont) / exposure;
  stats.cav_rate = static_cast<double>(cav) / exposure;
  return stats;
}

std::vector<ScanPoint> pump_scan(const SystemParams& params, std::span<const double> delta_values,
                                 const EnsembleConfig& config) {
  std::vector<ScanPoint> out;
  out.reserve(delta_values.size());
  for (double delta : delta_values) {
    SystemParams p = params;
    p.delta_pump = delta;
    const EnsembleStats s = run_ensemble(config, p);
    ScanPoint pt;
    pt.value = delta;
    pt.n_mean = s.stationary_n_mean;
    pt.q = s.stationary_q;
    pt.pop_e = s.stationary_pop_e;
    pt.delta_n_over_n = std::isfinite(s.stationary_q) ? std::sqrt((s.stationary_q + 1.0) / s.stationary_n_mean) : kNaN;
    out.push_back(pt);
  }
  return out;
}

std::vector<ScanPoint> fixed_g_scan(const SystemParams& params, std::span<const double> g_values) {
  std::vector<ScanPoint> out;
  out.reserve(g_values.size());
  for (double g : g_values) {
    SystemParams p = params;
    p.g = g;
    const FieldStats f = field_stats(steady_state(build_liouvillian(p, 0.0)));
    out.push_back({g, f.n_mean, f.q, f.pop_e, f.delta_n_over_n});
  }
  return out;
}

}  // namespace selftrap
