#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "selftrap/model.hpp"
#include "selftrap/params.hpp"
#include "selftrap/rng.hpp"

namespace selftrap {

/// Momentum kick attached to pump and spontaneous-emission jumps.
enum class RecoilModel {
  none,
  uniform_pm1,        // +-1 hbar k with equal probability
  dipole_projection,  // u hbar k, u on [-1, 1] with density (3/8)(1 + u^2)
};

const char* to_string(RecoilModel model) noexcept;
/// Throws InvalidArgument for an unknown name.
RecoilModel parse_recoil_model(std::string_view name);

struct TrajectoryConfig {
  double dt = 1e-3;       // 1/kappa
  double t_final = 10.0;  // 1/kappa
  std::uint64_t seed = 1;
  double x0 = 0.05;        // wavelengths
  double p0 = 0.0;         // hbar k
  double p0_spread = 0.0;  // std. dev. of a Gaussian added to p0 at start
  /// Initial amplitudes in the QuantumState layout; ground state and vacuum if empty.
  std::optional<std::vector<cplx>> initial_amplitudes;
  RecoilModel recoil_model = RecoilModel::uniform_pm1;
  int sample_every = 10;
  bool record_jumps = true;
  /// Largest tolerated ratio of truncated pump events to all pump events.
  double truncation_limit = 1e-3;

  std::int64_t n_steps() const;
  void validate() const;
};

struct JumpEvent {
  double time = 0.0;
  JumpKind kind = JumpKind::pump;
  double momentum_kick = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<Observables> obs;
  std::vector<double> x;
  std::vector<double> p;
  /// Product of no-jump norm losses since the last jump (reset to 1 by a jump).
  std::vector<double> survival;
  /// Conditional Mandel factor of the sampled wave function (NaN for vacuum).
  std::vector<double> q;
  std::vector<JumpEvent> jumps;
  std::int64_t pump_events = 0;
  std::int64_t spont_events = 0;
  std::int64_t cav_events = 0;
  std::int64_t truncation_hits = 0;
};

struct StepOutcome {
  std::optional<JumpKind> jump;
  double momentum_kick = 0.0;
  bool truncation_hit = false;
  /// Squared norm after the non-Hermitian propagation, before any jump.
  double norm2_no_jump = 1.0;
};

/// Advances (state, motion) by one dt: half kick, drift, non-Hermitian propagation
/// at the new position, at most one jump drawn against the pre-step
/// probabilities, renormalization, second half kick.
///
/// A pump draw that lands on the |g,N> share is a truncation hit: no jump is
/// applied and outcome.truncation_hit is set.
StepOutcome step(QuantumState& state, MotionState& motion, Rng& rng, const TrajectoryConfig& config,
                 const SystemParams& params);

/// Drift velocity in wavelengths per 1/kappa for momentum p in hbar k:
/// dx/dt = p/m with m = hbar k^2 / (2 recoil).
inline double drift_velocity(double p, const SystemParams& params) noexcept {
  return params.recoil * p / std::numbers::pi;
}

/// Initial state and motion for a config; draws the momentum spread from rng.
QuantumState initial_state(const TrajectoryConfig& config, const SystemParams& params);
MotionState initial_motion(const TrajectoryConfig& config, Rng& rng);

/// Deterministic in (config, params). Throws TruncationError when truncation
/// hits exceed config.truncation_limit of all pump events, NumericalError on NaN.
TrajectoryRecord run_trajectory(const TrajectoryConfig& config, const SystemParams& params);

}  // namespace selftrap
