#include "selftrap/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>

#include "selftrap/errors.hpp"

namespace selftrap {

namespace {

using Triplet = Eigen::Triplet<cplx>;
using Vector = Eigen::VectorXcd;

SparseMatrix from_triplets(int dim, const std::vector<Triplet>& t) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Vector vec(const DenseMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

DenseMatrix unvec(const Vector& v, int dim) { return Eigen::Map<const DenseMatrix>(v.data(), dim, dim); }

// Indices of vec(rho) entries whose bra/ket excitation numbers differ by `diff`
// (excitation(row) - excitation(col) == diff).
struct Sector {
  std::vector<int> global;
  std::vector<int> local;  // size D^2, -1 outside the sector
};

Sector make_sector(int n_max, int diff) {
  const int d = product_dim(n_max);
  Sector s;
  s.local.assign(static_cast<std::size_t>(d) * d, -1);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      if (excitation(n_max, i) - excitation(n_max, j) == diff) {
        const int k = i + d * j;
        s.local[static_cast<std::size_t>(k)] = static_cast<int>(s.global.size());
        s.global.push_back(k);
      }
    }
  }
  return s;
}

DenseMatrix restrict_to(const Superoperator& L, const Sector& s) {
  const auto n = static_cast<Eigen::Index>(s.global.size());
  DenseMatrix block = DenseMatrix::Zero(n, n);
  for (int col = 0; col < L.matrix.outerSize(); ++col) {
    const int lc = s.local[static_cast<std::size_t>(col)];
    if (lc < 0) continue;
    for (SparseMatrix::InnerIterator it(L.matrix, col); it; ++it) {
      const int lr = s.local[static_cast<std::size_t>(it.row())];
      if (lr < 0) {
        if (std::abs(it.value()) > 0.0) {
          throw NumericalError("superoperator couples excitation sectors");
        }
        continue;
      }
      block(lr, lc) = it.value();
    }
  }
  return block;
}

double one_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (int col = 0; col < m.outerSize(); ++col) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

namespace ops {

SparseMatrix identity(int n_max) {
  SparseMatrix m(product_dim(n_max), product_dim(n_max));
  m.setIdentity();
  return m;
}

SparseMatrix annihilation(int n_max) {
  std::vector<Triplet> t;
  for (int n = 1; n <= n_max; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    t.emplace_back(index_g(n_max, n - 1), index_g(n_max, n), s);
    t.emplace_back(index_e(n_max, n - 1), index_e(n_max, n), s);
  }
  return from_triplets(product_dim(n_max), t);
}

SparseMatrix sigma_minus(int n_max) {
  std::vector<Triplet> t;
  for (int n = 0; n <= n_max; ++n) t.emplace_back(index_g(n_max, n), index_e(n_max, n), 1.0);
  return from_triplets(product_dim(n_max), t);
}

SparseMatrix projector_e(int n_max) {
  std::vector<Triplet> t;
  for (int n = 0; n <= n_max; ++n) t.emplace_back(index_e(n_max, n), index_e(n_max, n), 1.0);
  return from_triplets(product_dim(n_max), t);
}

SparseMatrix projector_g(int n_max) {
  std::vector<Triplet> t;
  for (int n = 0; n <= n_max; ++n) t.emplace_back(index_g(n_max, n), index_g(n_max, n), 1.0);
  return from_triplets(product_dim(n_max), t);
}

}  // namespace ops

SparseMatrix sandwich(const SparseMatrix& a, const SparseMatrix& b) {
  // vec(A rho B) = (B^T (x) A) vec(rho)
  SparseMatrix bt = b.transpose();
  SparseMatrix out = Eigen::kroneckerProduct(bt, a);
  return out;
}

DenseMatrix Superoperator::apply(const DenseMatrix& rho) const {
  return unvec(matrix * vec(rho), dim());
}

Superoperator build_liouvillian(const SystemParams& params, double x) {
  params.validate();
  const int nmax = params.n_max;
  const SparseMatrix id = ops::identity(nmax);
  const SparseMatrix a = ops::annihilation(nmax);
  const SparseMatrix ad = a.adjoint();
  const SparseMatrix sm = ops::sigma_minus(nmax);
  const SparseMatrix sp = sm.adjoint();
  const SparseMatrix pe = ops::projector_e(nmax);
  const SparseMatrix pg = ops::projector_g(nmax);
  const SparseMatrix n_op = ad * a;

  auto commutator = [&](const SparseMatrix& op) -> SparseMatrix {
    return sandwich(op, id) - sandwich(id, op);
  };
  auto anticommutator = [&](const SparseMatrix& op) -> SparseMatrix {
    return sandwich(op, id) + sandwich(id, op);
  };

  const cplx i{0.0, 1.0};
  const double gx = coupling(x, params);

  SparseMatrix L = i * params.detuning * commutator(pe);
  L -= gx * (commutator(SparseMatrix(sp * a)) - commutator(SparseMatrix(ad * sm)));
  L += params.delta_pump * (2.0 * sandwich(sp, sm) - anticommutator(pg));
  L += params.gamma * (2.0 * sandwich(sm, sp) - anticommutator(pe));
  L += params.kappa * (2.0 * sandwich(a, ad) - anticommutator(n_op));
  L.prune(cplx{0.0, 0.0});
  L.makeCompressed();
  return Superoperator{std::move(L), nmax};
}

DensityMatrix steady_state(const Superoperator& L) {
  const Sector sector = make_sector(L.n_max, 0);
  const DenseMatrix block = restrict_to(L, sector);
  Eigen::BDCSVD<DenseMatrix> svd(block, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index n = sv.size();
  const double smax = sv(0);
  if (!(smax > 0.0)) throw NumericalError("steady state is not unique: the generator vanishes");
  if (n >= 2 && sv(n - 2) < 1e-9 * smax) {
    throw NumericalError("steady state is not unique: second-smallest singular value " +
                         std::to_string(sv(n - 2)) + " vs largest " + std::to_string(smax));
  }
  if (sv(n - 1) > 1e-8 * smax) {
    throw NumericalError("generator has no numerical kernel (smallest singular value " +
                         std::to_string(sv(n - 1)) + ")");
  }
  const Vector null = svd.matrixV().col(n - 1);

  const int d = L.dim();
  DenseMatrix rho = DenseMatrix::Zero(d, d);
  for (std::size_t k = 0; k < sector.global.size(); ++k) {
    const int g = sector.global[k];
    rho(g % d, g / d) = null(static_cast<Eigen::Index>(k));
  }
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return DensityMatrix{std::move(rho), L.n_max};
}

double residual_norm(const Superoperator& L, const DensityMatrix& rho) {
  return (L.matrix * vec(rho.rho)).norm();
}

DensityMatrix evolve_rho(const Superoperator& L, const DensityMatrix& rho0, double t, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("evolve_rho: dt must be > 0");
  if (!(t >= 0.0)) throw InvalidArgument("evolve_rho: t must be >= 0");
  if (rho0.n_max != L.n_max) throw InvalidArgument("evolve_rho: dimension mismatch");
  const auto steps = static_cast<long>(std::ceil(t / dt - 1e-9));
  if (steps == 0) return rho0;
  const double h = t / static_cast<double>(steps);
  const double scale = h * one_norm(L.matrix);
  if (scale > 2.5) {
    throw StepTooCoarse("evolve_rho: dt * ||L||_1 = " + std::to_string(scale) + " exceeds 2.5");
  }

  Vector y = vec(rho0.rho);
  Vector k1, k2, k3, k4;
  for (long s = 0; s < steps; ++s) {
    k1 = L.matrix * y;
    k2 = L.matrix * (y + 0.5 * h * k1);
    k3 = L.matrix * (y + 0.5 * h * k2);
    k4 = L.matrix * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return DensityMatrix{unvec(y, L.dim()), L.n_max};
}

std::vector<double> photon_distribution(const DensityMatrix& rho) {
  std::vector<double> p(static_cast<std::size_t>(rho.n_max + 1));
  for (int n = 0; n <= rho.n_max; ++n) {
    p[static_cast<std::size_t>(n)] = rho.rho(index_g(rho.n_max, n), index_g(rho.n_max, n)).real() +
                                     rho.rho(index_e(rho.n_max, n), index_e(rho.n_max, n)).real();
  }
  return p;
}

FieldStats field_stats(const DensityMatrix& rho) {
  FieldStats s;
  const std::vector<double> p = photon_distribution(rho);
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double nd = static_cast<double>(n);
    s.n_mean += nd * p[n];
    s.n2_mean += nd * nd * p[n];
  }
  for (int n = 0; n <= rho.n_max; ++n) {
    s.pop_e += rho.rho(index_e(rho.n_max, n), index_e(rho.n_max, n)).real();
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (s.n_mean > kVacuumPhotons) {
    const double var = s.n2_mean - s.n_mean * s.n_mean;
    s.q = var / s.n_mean - 1.0;
    s.g2_zero = (s.n2_mean - s.n_mean) / (s.n_mean * s.n_mean);
    s.delta_n_over_n = std::sqrt(std::max(var, 0.0)) / s.n_mean;
  } else {
    s.q = nan;
    s.g2_zero = nan;
    s.delta_n_over_n = nan;
  }
  return s;
}

DensityMatrix projector(const QuantumState& state) {
  const int nmax = state.n_max();
  const int d = product_dim(nmax);
  Vector psi = Vector::Zero(d);
  psi(index_g(nmax, 0)) = state.g(0);
  for (int n = 1; n <= nmax; ++n) {
    psi(index_g(nmax, n)) = state.g(n);
    psi(index_e(nmax, n - 1)) = state.e(n);
  }
  DenseMatrix rho = psi * psi.adjoint() / state.norm2();
  return DensityMatrix{std::move(rho), nmax};
}

DensityMatrix fock_density(int n_max, int photons, bool excited) {
  const int d = product_dim(n_max);
  DenseMatrix rho = DenseMatrix::Zero(d, d);
  const int k = excited ? index_e(n_max, photons) : index_g(n_max, photons);
  rho(k, k) = 1.0;
  return DensityMatrix{std::move(rho), n_max};
}

DensityMatrix coherent_density(int n_max, cplx alpha) {
  const int d = product_dim(n_max);
  Vector psi = Vector::Zero(d);
  cplx amp = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
    psi(index_g(n_max, n)) = amp;
  }
  psi.normalize();
  return DensityMatrix{psi * psi.adjoint(), n_max};
}

DensityMatrix thermal_density(int n_max, double n_th) {
  const int d = product_dim(n_max);
  DenseMatrix rho = DenseMatrix::Zero(d, d);
  const double ratio = n_th / (1.0 + n_th);
  double w = 1.0;
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    rho(index_g(n_max, n), index_g(n_max, n)) = w;
    total += w;
    w *= ratio;
  }
  rho /= total;
  return DensityMatrix{std::move(rho), n_max};
}

Spectrum emission_spectrum(const Superoperator& L, const DensityMatrix& rho,
                           std::span<const double> omega_grid) {
  const int nmax = L.n_max;
  const int d = L.dim();
  const Sector sector = make_sector(nmax, -1);
  const DenseMatrix block = restrict_to(L, sector);
  const DenseMatrix a = DenseMatrix(ops::annihilation(nmax));
  const DenseMatrix source = a * rho.rho;

  const auto m = static_cast<Eigen::Index>(sector.global.size());
  Vector b(m);
  Vector weight(m);
  double inside = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const int g = sector.global[static_cast<std::size_t>(k)];
    b(k) = source(g % d, g / d);
    weight(k) = std::conj(a(g % d, g / d));
    inside += std::norm(b(k));
  }
  if (std::abs(source.squaredNorm() - inside) > 1e-20 + 1e-12 * source.squaredNorm()) {
    throw InvalidArgument("emission_spectrum: rho is not block diagonal in excitation number");
  }

  Spectrum out;
  out.omega.assign(omega_grid.begin(), omega_grid.end());
  out.value.reserve(out.omega.size());
  const cplx i{0.0, 1.0};
  const DenseMatrix id = DenseMatrix::Identity(m, m);
  for (double w : out.omega) {
    Eigen::PartialPivLU<DenseMatrix> lu(i * w * id - block);
    if (!(lu.rcond() > 1e-14)) {
      throw NumericalError("emission_spectrum: resolvent singular at omega = " + std::to_string(w) +
                           "; shift the grid point");
    }
    const Vector y = lu.solve(b);
    out.value.push_back(2.0 * (weight.transpose() * y)(0).real());
  }
  const double peak = out.value.empty() ? 0.0 : *std::max_element(out.value.begin(), out.value.end());
  out.normalized.reserve(out.value.size());
  for (double v : out.value) out.normalized.push_back(peak > 0.0 ? v / peak : 0.0);
  return out;
}

Spectrum emission_spectrum(const SystemParams& params, double x, std::span<const double> omega_grid) {
  const Superoperator L = build_liouvillian(params, x);
  return emission_spectrum(L, steady_state(L), omega_grid);
}

SpectrumShape spectrum_shape(const Spectrum& spectrum) {
  SpectrumShape shape;
  const auto& w = spectrum.omega;
  const auto& s = spectrum.value;
  if (s.empty()) return shape;
  const auto ipk = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  shape.peak_omega = w[ipk];
  shape.peak_value = s[ipk];
  const double half = 0.5 * s[ipk];

  double lo = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = ipk; k > 0; --k) {
    if (s[k - 1] < half) {
      lo = w[k - 1] + (half - s[k - 1]) * (w[k] - w[k - 1]) / (s[k] - s[k - 1]);
      break;
    }
  }
  double hi = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = ipk; k + 1 < s.size(); ++k) {
    if (s[k + 1] < half) {
      hi = w[k] + (s[k] - half) * (w[k + 1] - w[k]) / (s[k] - s[k + 1]);
      break;
    }
  }
  shape.fwhm = hi - lo;
  return shape;
}

double spectrum_weight(const Spectrum& spectrum) {
  double total = 0.0;
  for (std::size_t k = 1; k < spectrum.omega.size(); ++k) {
    total += 0.5 * (spectrum.value[k] + spectrum.value[k - 1]) * (spectrum.omega[k] - spectrum.omega[k - 1]);
  }
  return total / kTwoPi;
}

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out;
  if (points <= 0) return out;
  if (points == 1) return {lo};
  out.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) out.push_back(lo + (hi - lo) * k / (points - 1));
  return out;
}

}  // namespace selftrap
