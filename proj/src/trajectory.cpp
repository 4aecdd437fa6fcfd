#include "selftrap/trajectory.hpp"

#include <cmath>
#include <string>

#include "selftrap/errors.hpp"

namespace selftrap {

const char* to_string(RecoilModel model) noexcept {
  switch (model) {
    case RecoilModel::none:
      return "none";
    case RecoilModel::uniform_pm1:
      return "uniform_pm1";
    case RecoilModel::dipole_projection:
      return "dipole_projection";
  }
  return "?";
}

RecoilModel parse_recoil_model(std::string_view name) {
  if (name == "none") return RecoilModel::none;
  if (name == "uniform_pm1") return RecoilModel::uniform_pm1;
  if (name == "dipole_projection") return RecoilModel::dipole_projection;
  throw InvalidArgument("unknown recoil model '" + std::string(name) +
                        "' (expected none, uniform_pm1 or dipole_projection)");
}

std::int64_t TrajectoryConfig::n_steps() const {
  return static_cast<std::int64_t>(std::llround(t_final / dt));
}

void TrajectoryConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("traj.dt must be > 0");
  if (!(t_final >= dt) || !std::isfinite(t_final)) throw InvalidArgument("traj.t_final must be >= traj.dt");
  if (sample_every < 1) throw InvalidArgument("traj.sample_every must be >= 1");
  if (!std::isfinite(x0) || !std::isfinite(p0)) throw InvalidArgument("traj.x0 and traj.p0 must be finite");
  if (!(p0_spread >= 0.0)) throw InvalidArgument("traj.p0_spread must be >= 0");
  if (!(truncation_limit >= 0.0)) throw InvalidArgument("traj.truncation_limit must be >= 0");
}

namespace {

double draw_kick(RecoilModel model, Rng& rng) {
  switch (model) {
    case RecoilModel::none:
      return 0.0;
    case RecoilModel::uniform_pm1:
      return rng.uniform() < 0.5 ? -1.0 : 1.0;
    case RecoilModel::dipole_projection:
      for (;;) {
        const double u = 2.0 * rng.uniform() - 1.0;
        if (2.0 * rng.uniform() < 1.0 + u * u) return u;
      }
  }
  return 0.0;
}

}  // namespace

StepOutcome step(QuantumState& state, MotionState& motion, Rng& rng, const TrajectoryConfig& config,
                 const SystemParams& params) {
  const double dt = config.dt;
  StepOutcome out;

  motion.p += 0.5 * dt * force(state, motion.x, params);
  motion.x += drift_velocity(motion.p, params) * dt;

  const JumpProbabilities prob = jump_probabilities(state, dt, params);
  const double p_truncated = 2.0 * params.delta_pump * top_ground_weight(state) / state.norm2() * dt;
  const double p_pump_kept = prob.pump - p_truncated;

  heff_step_inplace(state, motion.x, dt, params);
  out.norm2_no_jump = state.norm2();

  const double r = rng.uniform();
  if (r < p_pump_kept) {
    out.jump = JumpKind::pump;
  } else if (r < prob.pump) {
    out.truncation_hit = true;
  } else if (r < prob.pump + prob.spont) {
    out.jump = JumpKind::spont;
  } else if (r < prob.total()) {
    out.jump = JumpKind::cav;
  }

  if (out.jump) {
    apply_jump_inplace(state, *out.jump);
    if (*out.jump != JumpKind::cav) {
      out.momentum_kick = draw_kick(config.recoil_model, rng);
      motion.p += out.momentum_kick;
    }
  } else {
    state.renormalize();
  }

  motion.p += 0.5 * dt * force(state, motion.x, params);

  if (!std::isfinite(motion.p) || !std::isfinite(motion.x) || !std::isfinite(state.norm2())) {
    throw NumericalError("non-finite value in trajectory step");
  }
  return out;
}

QuantumState initial_state(const TrajectoryConfig& config, const SystemParams& params) {
  if (!config.initial_amplitudes) return QuantumState(params.n_max);
  QuantumState state(params.n_max, *config.initial_amplitudes);
  state.renormalize();
  return state;
}

MotionState initial_motion(const TrajectoryConfig& config, Rng& rng) {
  MotionState m{config.x0, config.p0};
  if (config.p0_spread > 0.0) m.p += config.p0_spread * rng.normal();
  return m;
}

TrajectoryRecord run_trajectory(const TrajectoryConfig& config, const SystemParams& params) {
  config.validate();
  params.validate();

  Rng rng(config.seed);
  QuantumState state = initial_state(config, params);
  MotionState motion = initial_motion(config, rng);

  const std::int64_t n_steps = config.n_steps();
  const std::size_t n_samples = static_cast<std::size_t>(n_steps / config.sample_every + 1);
  TrajectoryRecord rec;
  rec.t.reserve(n_samples);
  rec.obs.reserve(n_samples);
  rec.x.reserve(n_samples);
  rec.p.reserve(n_samples);
  rec.survival.reserve(n_samples);
  rec.q.reserve(n_samples);

  double survival = 1.0;
  auto sample = [&](double t) {
    const Observables o = observables(state);
    rec.t.push_back(t);
    rec.obs.push_back(o);
    rec.x.push_back(motion.x);
    rec.p.push_back(motion.p);
    rec.survival.push_back(survival);
    rec.q.push_back(mandel_q(o.n_mean, o.n2_mean));
  };

  sample(0.0);
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    const StepOutcome outcome = step(state, motion, rng, config, params);
    const double t = static_cast<double>(s) * config.dt;
    if (outcome.jump) {
      survival = 1.0;
      switch (*outcome.jump) {
        case JumpKind::pump:
          ++rec.pump_events;
          break;
        case JumpKind::spont:
          ++rec.spont_events;
          break;
        case JumpKind::cav:
          ++rec.cav_events;
          break;
      }
      if (config.record_jumps) rec.jumps.push_back({t, *outcome.jump, outcome.momentum_kick});
    } else {
      survival *= outcome.norm2_no_jump;
      if (outcome.truncation_hit) {
        ++rec.truncation_hits;
        ++rec.pump_events;
      }
    }
    if (s % config.sample_every == 0) sample(t);
  }

  if (rec.truncation_hits > 0 &&
      static_cast<double>(rec.truncation_hits) >
          config.truncation_limit * static_cast<double>(rec.pump_events)) {
    throw TruncationError(std::to_string(rec.truncation_hits) + " of " +
                          std::to_string(rec.pump_events) +
                          " pump events left the truncated Fock space; raise params.n_max (now " +
                          std::to_string(params.n_max) + ")");
  }
  return rec;
}

}  // namespace selftrap
