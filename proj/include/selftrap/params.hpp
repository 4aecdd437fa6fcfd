#pragma once

namespace selftrap {

/// Physical parameters in units where the cavity field decay rate is the
/// frequency unit and hbar = 1.
struct SystemParams {
  double kappa = 1.0;       // cavity field decay rate
  double gamma = 0.0;       // atomic field decay rate (spontaneous emission at 2*gamma)
  double delta_pump = 0.0;  // incoherent pump, events at rate 2*delta_pump
  double g = 0.0;           // coupling at an antinode
  double detuning = 0.0;    // omega_cavity - omega_atom
  double recoil = 0.01;     // hbar k^2 / (2m)
  int n_max = 10;           // Fock truncation

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

}  // namespace selftrap
