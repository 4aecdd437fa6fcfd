#pragma once

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "selftrap/params.hpp"

namespace selftrap {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class JumpKind { pump, spont, cav };

/// Pure state of atom + mode in the excitation-manifold layout
///
///   |psi> = g_0 |g,0> + sum_{n=1..N} ( g_n |g,n> + e_n |e,n-1> )
///
/// stored as [g_0, g_1, e_1, g_2, e_2, ..., g_N, e_N] (2N+1 amplitudes).
/// Manifold n is the pair {|g,n>, |e,n-1>}; the state |e,N> is not represented.
///
/// Jumps map one manifold onto a neighbour and H_eff never mixes manifolds, so
/// the state keeps track of the band of manifolds [first_manifold(),
/// last_manifold()] that may hold nonzero amplitudes; every operation only
/// touches that band. norm2() is cached.
class QuantumState {
 public:
  /// Ground state of the atom with the mode in vacuum.
  explicit QuantumState(int n_max);
  /// Throws InvalidArgument unless amps.size() == 2*n_max + 1.
  QuantumState(int n_max, std::vector<cplx> amps);

  static QuantumState ground_fock(int n_max, int photons);
  /// |e, photons>; requires photons < n_max.
  static QuantumState excited_fock(int n_max, int photons);

  int n_max() const noexcept { return n_max_; }
  std::size_t size() const noexcept { return amps_.size(); }

  /// Amplitude of |g,n>, n = 0..N.
  cplx g(int n) const { return amps_[g_index(n)]; }
  /// Amplitude of |e,n-1>, n = 1..N.
  cplx e(int n) const { return amps_[e_index(n)]; }

  static constexpr std::size_t g_index(int n) noexcept {
    return n == 0 ? 0 : static_cast<std::size_t>(2 * n - 1);
  }
  static constexpr std::size_t e_index(int n) noexcept { return static_cast<std::size_t>(2 * n); }

  std::span<const cplx> amplitudes() const noexcept { return amps_; }

  int first_manifold() const noexcept { return lo_; }
  int last_manifold() const noexcept { return hi_; }

  double norm2() const noexcept { return norm2_; }
  /// Scales to unit norm. Throws NumericalError on a zero or non-finite norm.
  void renormalize();

 private:
  friend void heff_step_inplace(QuantumState&, double, double, const SystemParams&);
  friend void apply_jump_inplace(QuantumState&, JumpKind);

  void update_norm() noexcept;
  void fit_support() noexcept;

  int n_max_;
  std::vector<cplx> amps_;
  int lo_ = 0;
  int hi_ = 0;
  double norm2_ = 1.0;
};

/// Classical centre-of-mass variables: x in wavelengths, p in units of hbar*k.
struct MotionState {
  double x = 0.0;
  double p = 0.0;
};

struct Observables {
  double n_mean = 0.0;
  double n2_mean = 0.0;
  double pop_e = 0.0;
  cplx coherence{};  // <|e><g| a>
};

const char* to_string(JumpKind kind) noexcept;

struct JumpProbabilities {
  double pump = 0.0;
  double spont = 0.0;
  double cav = 0.0;

  double total() const noexcept { return pump + spont + cav; }
};

/// Sum of jump probabilities per step above which first-order sampling is refused.
inline constexpr double kMaxJumpProbability = 0.1;

/// g cos(kx) for x in wavelengths.
double coupling(double x, const SystemParams& params);

/// exp(-i H_eff dt) with the coupling frozen at x. Each excitation manifold is a
/// 2x2 non-Hermitian block exponentiated in closed form; the result is not
/// renormalized, so its norm loss is the total jump probability of the step.
QuantumState heff_step(const QuantumState& state, double x, double dt,
                       const SystemParams& params);
void heff_step_inplace(QuantumState& state, double x, double dt, const SystemParams& params);

/// p_i = <C_i^dag C_i> dt for pump, spontaneous emission and cavity decay.
/// Throws StepTooCoarse when the sum reaches kMaxJumpProbability.
JumpProbabilities jump_probabilities(const QuantumState& state, double dt,
                                     const SystemParams& params);

/// Weight of |g,N>, the part of the state a pump jump would push out of the
/// represented space.
double top_ground_weight(const QuantumState& state) noexcept;

/// Collapse C_i |psi>, renormalized. A pump jump discards the |g,N> component.
/// Throws InvalidArgument when the collapsed state vanishes.
QuantumState apply_jump(const QuantumState& state, JumpKind which);
void apply_jump_inplace(QuantumState& state, JumpKind which);

/// Dipole force in units of hbar*k*kappa for a normalized state:
/// F = -d<H_eff>/dx = 2 g sin(kx) Im<|e><g| a>.
double force(const QuantumState& state, double x, const SystemParams& params);

/// Expectation values for a normalized state.
Observables observables(const QuantumState& state);

/// Mandel Q from first and second moments; NaN for an empty mode.
double mandel_q(double n_mean, double n2_mean) noexcept;

}  // namespace selftrap
