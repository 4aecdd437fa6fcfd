#include "selftrap/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "selftrap/errors.hpp"

namespace selftrap {

namespace {

void require_nonnegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string("params.") + name + " must be finite and >= 0, got " +
                          std::to_string(value));
  }
}

// sinh(w)/w, finite at w = 0.
cplx sinhc(cplx w) {
  if (std::abs(w) < 1e-3) {
    const cplx w2 = w * w;
    return 1.0 + w2 / 6.0 + w2 * w2 / 120.0;
  }
  return std::sinh(w) / w;
}

}  // namespace

void SystemParams::validate() const {
  require_nonnegative(kappa, "kappa");
  require_nonnegative(gamma, "gamma");
  require_nonnegative(delta_pump, "delta_pump");
  require_nonnegative(g, "g");
  require_nonnegative(recoil, "recoil");
  if (!std::isfinite(detuning)) throw InvalidArgument("params.detuning must be finite");
  if (n_max < 1) throw InvalidArgument("params.n_max must be >= 1, got " + std::to_string(n_max));
}

QuantumState::QuantumState(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  amps_.assign(static_cast<std::size_t>(2 * n_max + 1), cplx{});
  amps_[0] = 1.0;
  norm2_ = 1.0;
  lo_ = hi_ = 0;
}

QuantumState::QuantumState(int n_max, std::vector<cplx> amps) : n_max_(n_max), amps_(std::move(amps)) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (amps_.size() != static_cast<std::size_t>(2 * n_max + 1)) {
    throw InvalidArgument("expected " + std::to_string(2 * n_max + 1) + " amplitudes, got " +
                          std::to_string(amps_.size()));
  }
  fit_support();
  update_norm();
}

QuantumState QuantumState::ground_fock(int n_max, int photons) {
  if (photons < 0 || photons > n_max) throw InvalidArgument("photon number outside [0, n_max]");
  std::vector<cplx> amps(static_cast<std::size_t>(2 * n_max + 1));
  amps[g_index(photons)] = 1.0;
  return QuantumState(n_max, std::move(amps));
}

QuantumState QuantumState::excited_fock(int n_max, int photons) {
  if (photons < 0 || photons >= n_max) throw InvalidArgument("photon number outside [0, n_max)");
  std::vector<cplx> amps(static_cast<std::size_t>(2 * n_max + 1));
  amps[e_index(photons + 1)] = 1.0;
  return QuantumState(n_max, std::move(amps));
}

void QuantumState::fit_support() noexcept {
  auto nonzero = [this](int m) {
    return m == 0 ? amps_[0] != cplx{} : (amps_[g_index(m)] != cplx{} || amps_[e_index(m)] != cplx{});
  };
  lo_ = 0;
  while (lo_ < n_max_ && !nonzero(lo_)) ++lo_;
  hi_ = n_max_;
  while (hi_ > lo_ && !nonzero(hi_)) --hi_;
}

void QuantumState::update_norm() noexcept {
  const std::size_t begin = g_index(lo_);
  const std::size_t end = e_index(hi_) + 1;
  double s = 0.0;
  for (std::size_t k = begin; k < end; ++k) s += std::norm(amps_[k]);
  norm2_ = s;
}

void QuantumState::renormalize() {
  if (!(norm2_ > 0.0) || !std::isfinite(norm2_)) {
    throw NumericalError("cannot renormalize state with squared norm " + std::to_string(norm2_));
  }
  const double scale = 1.0 / std::sqrt(norm2_);
  const std::size_t end = e_index(hi_) + 1;
  for (std::size_t k = g_index(lo_); k < end; ++k) amps_[k] *= scale;
  norm2_ = 1.0;
}

const char* to_string(JumpKind kind) noexcept {
  switch (kind) {
    case JumpKind::pump:
      return "pump";
    case JumpKind::spont:
      return "spont";
    case JumpKind::cav:
      return "cav";
  }
  return "?";
}

double coupling(double x, const SystemParams& params) { return params.g * std::cos(kTwoPi * x); }

void heff_step_inplace(QuantumState& state, double x, double dt, const SystemParams& params) {
  const double gx = coupling(x, params);
  const cplx i{0.0, 1.0};
  auto& amps = state.amps_;

  if (state.lo_ == 0) amps[0] *= std::exp(-params.delta_pump * dt);

  // Within manifold n the block is m0*I + [[a, i G sqrt(n)], [-i G sqrt(n), -a]] with
  // a = (Delta + i(gamma - delta - kappa)) / 2 independent of n. Its square is
  // (a^2 + G^2 n) I, so exp(-i dt B) = cosh(w) I + sinh(w)/w (-i dt B), w^2 = -dt^2 (a^2 + G^2 n).
  const cplx a = 0.5 * cplx(params.detuning, params.gamma - params.delta_pump - params.kappa);
  const cplx a2 = a * a;
  const cplx phase = std::polar(1.0, 0.5 * params.detuning * dt);
  const double base_damp = 0.5 * (params.delta_pump + params.gamma) * dt;

  for (int n = std::max(state.lo_, 1); n <= state.hi_; ++n) {
    const double gn = gx * std::sqrt(static_cast<double>(n));
    const cplx w = -i * dt * std::sqrt(a2 + gn * gn);
    const cplx ch = std::cosh(w);
    const cplx sh = sinhc(w) * dt;
    // exp(-i m0 dt) with m0 = (-Delta - i(delta + gamma + kappa(2n-1))) / 2
    const cplx f = phase * std::exp(-base_damp - 0.5 * params.kappa * (2 * n - 1) * dt);

    const cplx u00 = f * (ch - i * sh * a);
    const cplx u11 = f * (ch + i * sh * a);
    const cplx u01 = f * sh * gn;
    const cplx u10 = -u01;

    cplx& gamp = amps[QuantumState::g_index(n)];
    cplx& eamp = amps[QuantumState::e_index(n)];
    const cplx g0 = gamp;
    const cplx e0 = eamp;
    gamp = u00 * g0 + u01 * e0;
    eamp = u10 * g0 + u11 * e0;
  }
  state.update_norm();
}

QuantumState heff_step(const QuantumState& state, double x, double dt, const SystemParams& params) {
  QuantumState out = state;
  heff_step_inplace(out, x, dt, params);
  return out;
}

JumpProbabilities jump_probabilities(const QuantumState& state, double dt,
                                     const SystemParams& params) {
  double pop_g = 0.0;
  double pop_e = 0.0;
  double n_mean = 0.0;
  if (state.first_manifold() == 0) pop_g += std::norm(state.g(0));
  for (int n = std::max(state.first_manifold(), 1); n <= state.last_manifold(); ++n) {
    const double wg = std::norm(state.g(n));
    const double we = std::norm(state.e(n));
    pop_g += wg;
    pop_e += we;
    n_mean += n * wg + (n - 1) * we;
  }
  const double inv = 1.0 / state.norm2();
  JumpProbabilities p;
  p.pump = 2.0 * params.delta_pump * pop_g * inv * dt;
  p.spont = 2.0 * params.gamma * pop_e * inv * dt;
  p.cav = 2.0 * params.kappa * n_mean * inv * dt;
  if (!(p.total() < kMaxJumpProbability)) {
    throw StepTooCoarse("jump probability per step " + std::to_string(p.total()) +
                        " reached the cap " + std::to_string(kMaxJumpProbability) +
                        "; reduce dt (currently " + std::to_string(dt) + ")");
  }
  return p;
}

double top_ground_weight(const QuantumState& state) noexcept {
  return std::norm(state.g(state.n_max()));
}

void apply_jump_inplace(QuantumState& state, JumpKind which) {
  const int nmax = state.n_max_;
  const int lo = state.lo_;
  const int hi = state.hi_;
  auto& amps = state.amps_;
  auto gi = [](int n) { return QuantumState::g_index(n); };
  auto ei = [](int n) { return QuantumState::e_index(n); };
  auto annihilated = [&] {
    throw InvalidArgument(std::string("jump '") + to_string(which) + "' annihilates the state");
  };

  switch (which) {
    case JumpKind::pump: {
      // |g,n> -> |e,n>, which sits in manifold n+1; |g,N> has nowhere to go.
      if (lo >= nmax) annihilated();
      if (lo >= 1) amps[ei(lo)] = 0.0;
      for (int n = std::min(hi, nmax - 1); n >= lo; --n) amps[ei(n + 1)] = amps[gi(n)];
      for (int n = lo; n <= hi; ++n) amps[gi(n)] = 0.0;
      state.lo_ = lo + 1;
      state.hi_ = std::min(hi + 1, nmax);
      break;
    }
    case JumpKind::spont:
      // |e,n-1> -> |g,n-1>
      if (hi == 0) annihilated();
      if (lo == 0) amps[0] = 0.0;
      for (int n = std::max(lo, 1); n <= hi; ++n) {
        amps[gi(n - 1)] = amps[ei(n)];
        amps[ei(n)] = 0.0;
      }
      amps[gi(hi)] = 0.0;
      state.lo_ = std::max(lo - 1, 0);
      state.hi_ = hi - 1;
      break;
    case JumpKind::cav:
      if (hi == 0) annihilated();
      if (lo == 0) amps[0] = 0.0;
      for (int n = std::max(lo, 1); n <= hi; ++n) {
        amps[gi(n - 1)] = std::sqrt(static_cast<double>(n)) * amps[gi(n)];
        if (n >= 2) {
          amps[ei(n - 1)] = std::sqrt(static_cast<double>(n - 1)) * amps[ei(n)];
        } else {
          amps[ei(1)] = 0.0;  // a |e,0> = 0
        }
      }
      amps[gi(hi)] = 0.0;
      amps[ei(hi)] = 0.0;
      state.lo_ = std::max(lo - 1, 0);
      state.hi_ = hi - 1;
      break;
  }
  state.update_norm();
  if (!(state.norm2() > 0.0)) annihilated();
  state.renormalize();
}

QuantumState apply_jump(const QuantumState& state, JumpKind which) {
  QuantumState out = state;
  apply_jump_inplace(out, which);
  return out;
}

double force(const QuantumState& state, double x, const SystemParams& params) {
  cplx c{};
  for (int n = std::max(state.first_manifold(), 1); n <= state.last_manifold(); ++n) {
    c += std::sqrt(static_cast<double>(n)) * std::conj(state.e(n)) * state.g(n);
  }
  return 2.0 * params.g * std::sin(kTwoPi * x) * c.imag() / state.norm2();
}

Observables observables(const QuantumState& state) {
  Observables o;
  for (int n = std::max(state.first_manifold(), 1); n <= state.last_manifold(); ++n) {
    const double wg = std::norm(state.g(n));
    const double we = std::norm(state.e(n));
    const double nd = static_cast<double>(n);
    o.n_mean += nd * wg + (nd - 1.0) * we;
    o.n2_mean += nd * nd * wg + (nd - 1.0) * (nd - 1.0) * we;
    o.pop_e += we;
    o.coherence += std::sqrt(nd) * std::conj(state.e(n)) * state.g(n);
  }
  const double inv = 1.0 / state.norm2();
  o.n_mean *= inv;
  o.n2_mean *= inv;
  o.pop_e *= inv;
  o.coherence *= inv;
  return o;
}

double mandel_q(double n_mean, double n2_mean) noexcept {
  if (!(n_mean > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (n2_mean - n_mean * n_mean) / n_mean - 1.0;
}

}  // namespace selftrap
