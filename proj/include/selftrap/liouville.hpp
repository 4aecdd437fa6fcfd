#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "selftrap/model.hpp"
#include "selftrap/params.hpp"

namespace selftrap {

using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Full product basis {|g,0..N>, |e,0..N>}: dimension 2(N+1). Unlike
/// QuantumState this includes |e,N>, so the oracle exposes truncation effects
/// instead of sharing them.
inline int product_dim(int n_max) noexcept { return 2 * (n_max + 1); }
inline int index_g(int n_max, int n) noexcept { (void)n_max; return n; }
inline int index_e(int n_max, int n) noexcept { return n_max + 1 + n; }
/// Number of excitations (photons plus atomic excitation) of a basis index.
inline int excitation(int n_max, int index) noexcept {
  return index <= n_max ? index : index - n_max;
}

struct DensityMatrix {
  DenseMatrix rho;
  int n_max = 0;
};

/// Operators on the product basis.
namespace ops {
SparseMatrix annihilation(int n_max);    // 1 (x) a
SparseMatrix sigma_minus(int n_max);     // |g><e| (x) 1
SparseMatrix projector_e(int n_max);     // |e><e| (x) 1
SparseMatrix projector_g(int n_max);     // |g><g| (x) 1
SparseMatrix identity(int n_max);
}  // namespace ops

/// Linear map on column-stacked density matrices: vec(rho)[i + D j] = rho(i, j).
struct Superoperator {
  SparseMatrix matrix;
  int n_max = 0;

  int dim() const noexcept { return product_dim(n_max); }
  DenseMatrix apply(const DenseMatrix& rho) const;
};

/// Superoperator of A rho B.
SparseMatrix sandwich(const SparseMatrix& left, const SparseMatrix& right);

/// Master-equation generator for a fixed atomic position x (coupling g cos(kx)),
/// assembled term by term: detuning commutator, Jaynes-Cummings commutators, and
/// the Lindblad dissipators for pumping, spontaneous emission and cavity loss.
Superoperator build_liouvillian(const SystemParams& params, double x);

/// Unique steady state, computed as the smallest right singular vector of L
/// restricted to the zero-coherence excitation sector (L conserves the
/// difference of bra and ket excitation numbers, and the steady state lives in
/// the diagonal sector). Throws NumericalError if that kernel is not one-dimensional.
DensityMatrix steady_state(const Superoperator& L);

/// ||L vec(rho)||_2.
double residual_norm(const Superoperator& L, const DensityMatrix& rho);

/// Classical fourth-order Runge-Kutta for d rho/dt = L rho up to time t with
/// steps no longer than dt. Throws StepTooCoarse when dt * ||L||_1 > 2.5.
DensityMatrix evolve_rho(const Superoperator& L, const DensityMatrix& rho0, double t, double dt);

/// Mean photon numbers below this are solver noise around the vacuum.
inline constexpr double kVacuumPhotons = 1e-10;

struct FieldStats {
  double n_mean = 0.0;
  double n2_mean = 0.0;
  double q = 0.0;               // Mandel Q; NaN for vacuum
  double g2_zero = 0.0;         // <a^dag a^dag a a> / <a^dag a>^2; NaN for vacuum
  double pop_e = 0.0;
  double delta_n_over_n = 0.0;  // NaN for vacuum
};

FieldStats field_stats(const DensityMatrix& rho);

/// Diagonal photon-number distribution P(n) summed over the atom.
std::vector<double> photon_distribution(const DensityMatrix& rho);

/// |psi><psi| / <psi|psi> embedded in the product basis.
DensityMatrix projector(const QuantumState& state);
DensityMatrix fock_density(int n_max, int photons, bool excited = false);
/// Truncated, renormalized coherent state of the mode with the atom in |g>.
DensityMatrix coherent_density(int n_max, cplx alpha);
/// Thermal mode (mean occupation n_th, truncated and renormalized), atom in |g>.
DensityMatrix thermal_density(int n_max, double n_th);

struct Spectrum {
  std::vector<double> omega;
  std::vector<double> value;       // S(omega)
  std::vector<double> normalized;  // S / max S
};

/// S(omega) = 2 Re Tr[a^dag (i omega - L)^-1 (a rho)] on the grid; omega is
/// measured from the cavity frequency, so the bare atom sits at -detuning.
/// rho must be block diagonal in excitation number. Throws NumericalError when a
/// grid point sits on a pole.
Spectrum emission_spectrum(const Superoperator& L, const DensityMatrix& rho,
                           std::span<const double> omega_grid);
/// Spectrum of the steady state at position x.
Spectrum emission_spectrum(const SystemParams& params, double x, std::span<const double> omega_grid);

struct SpectrumShape {
  double peak_omega = 0.0;
  double peak_value = 0.0;
  double fwhm = 0.0;  // NaN if the half maximum is not crossed on both sides
};

SpectrumShape spectrum_shape(const Spectrum& spectrum);

/// Trapezoidal integral of S over the grid divided by 2 pi.
double spectrum_weight(const Spectrum& spectrum);

std::vector<double> linspace(double lo, double hi, int points);

}  // namespace selftrap
