// generator.hpp - Lindblad superoperator of the two-qubit model and its RK4 integrator.
//
// Vectorization is row-major: vec(rho)[4*i + j] = rho(i, j), so
// vec(A X B) = kron(A, B^T) vec(X).
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "tqb/core.hpp"
#include "tqb/couplings.hpp"

namespace tqb {

using Matrix16c = Eigen::Matrix<Complex, 16, 16>;
using Vector16c = Eigen::Matrix<Complex, 16, 1>;

/// Generator L with d vec(rho)/dt = L vec(rho), tagged with the basis of the rho it acts on.
struct Superoperator {
  Matrix16c matrix;
  Basis basis = Basis::Computational;
};

namespace ops {

inline Matrix4c kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Matrix4c k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

inline Eigen::Matrix2cd sigma_plus() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = 1.0;  // |e><g| with e = 0, g = 1
  return m;
}

/// S_i^+ for qubit i in {0, 1}.
inline Matrix4c raising(int i) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return i == 0 ? kron2(sigma_plus(), id) : kron2(id, sigma_plus());
}

inline Matrix4c lowering(int i) { return raising(i).adjoint(); }

inline Matrix4c sz(int i) {
  Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
  z(0, 0) = 0.5;
  z(1, 1) = -0.5;
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return i == 0 ? kron2(z, id) : kron2(id, z);
}

inline Matrix16c kron4(const Matrix4c& a, const Matrix4c& b) {
  Matrix16c k;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return k;
}

/// Superoperator of X -> A X B.
inline Matrix16c sandwich(const Matrix4c& a, const Matrix4c& b) { return kron4(a, b.transpose()); }

inline Vector16c vec(const Matrix4c& m) {
  Vector16c v;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v(4 * i + j) = m(i, j);
  return v;
}

inline Matrix4c unvec(const Vector16c& v) {
  Matrix4c m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = v(4 * i + j);
  return m;
}

}  // namespace ops

/// System Hamiltonian omega0 (S1z + S2z) + Omega12 (S1+ S2- + S2+ S1-).
inline Matrix4c system_hamiltonian(const ModelParams& p) {
  using namespace ops;
  return p.omega0 * (sz(0) + sz(1)) +
         omega12(p) * (raising(0) * lowering(1) + raising(1) * lowering(0));
}

/// Full generator in the computational basis.
inline Superoperator build_generator(const ModelParams& p) {
  using namespace ops;
  const DerivedCoefficients c = derive(p);
  const Matrix4c id = Matrix4c::Identity();
  const Matrix4c h = system_hamiltonian(p);
  const double rates[2][2] = {{p.gamma, c.gamma12}, {c.gamma12, p.gamma}};
  const double n = c.n_tilde;
  const Complex m = c.m_tilde;

  Matrix16c l = Complex(0.0, -1.0) * (sandwich(h, id) - sandwich(id, h));
  // -(1/2) g K (rho AB + AB rho - 2 B rho A) for each channel
  auto dissipator = [&](const Matrix4c& a, const Matrix4c& b) {
    const Matrix4c ab = a * b;
    return Matrix16c(sandwich(id, ab) + sandwich(ab, id) - 2.0 * sandwich(b, a));
  };
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double g = rates[i][j];
      const Matrix4c pi = raising(i), mi = lowering(i), pj = raising(j), mj = lowering(j);
      l += -0.5 * g * (1.0 + n) * dissipator(pi, mj);
      l += -0.5 * g * n * dissipator(mi, pj);
      l += 0.5 * g * m * dissipator(pi, pj);
      l += 0.5 * g * std::conj(m) * dissipator(mi, mj);
    }
  }
  return {l, Basis::Computational};
}

/// Re-expresses a generator in the other basis.
inline Superoperator to_basis(const Superoperator& s, Basis target) {
  if (s.basis == target) return s;
  const Matrix4c& u = detail::dressed_unitary();
  // rho_d = U rho_c U^dagger, so vec(rho_d) = kron(U, conj U) vec(rho_c)
  const Matrix16c t = ops::sandwich(u, u.adjoint());
  const Matrix16c tinv = ops::sandwich(u.adjoint(), u);
  if (target == Basis::Dressed) return {t * s.matrix * tinv, Basis::Dressed};
  return {tinv * s.matrix * t, Basis::Computational};
}

inline double spectral_radius(const Superoperator& s) {
  Eigen::ComplexEigenSolver<Matrix16c> es(s.matrix, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Largest step evolve_oracle accepts: 1e-2 / Gamma_max.
inline double max_oracle_step(const Superoperator& s) { return 1e-2 / spectral_radius(s); }

/// 1e-3, tightened to 5e-3 / Gamma_max when the generator has fast coherent frequencies.
inline double default_oracle_step(const Superoperator& s) {
  return std::min(1e-3, 5e-3 / spectral_radius(s));
}

namespace detail {

// One classical RK4 step of a linear autonomous system is the degree-4
// Taylor polynomial of exp(hL); build it once and reuse it.
inline Matrix16c rk4_step_matrix(const Matrix16c& l, double h) {
  const Matrix16c a = h * l;
  const Matrix16c id = Matrix16c::Identity();
  return id + a * (id + a * (id / 2.0 + a * (id / 6.0 + a / 24.0)));
}

inline Vector16c rk4_advance(const Matrix16c& l, const Vector16c& y0, double span, double dt) {
  if (span <= 0.0) return y0;
  const auto full = static_cast<long long>(std::floor(span / dt));
  double rest = span - static_cast<double>(full) * dt;
  Vector16c y = y0;
  if (full > 0) {
    const Matrix16c step = rk4_step_matrix(l, dt);
    for (long long k = 0; k < full; ++k) y = step * y;
  }
  if (rest > 1e-15 * span) y = rk4_step_matrix(l, rest) * y;
  return y;
}

inline DensityMatrix finish_oracle_state(const Vector16c& y, Basis basis) {
  Matrix4c m = ops::unvec(y);
  const Matrix4c herm = 0.5 * (m + m.adjoint());
  const double herm_fix = (herm - m).cwiseAbs().maxCoeff();
  const Complex tr = herm.trace();
  const double trace_fix = std::abs(tr - Complex(1.0));
  if (herm_fix >= 1e-8 || trace_fix >= 1e-8) {
    throw AccuracyError("evolve_oracle: output corrections exceed 1e-8 (hermiticity " +
                        std::to_string(herm_fix) + ", trace " + std::to_string(trace_fix) + ")");
  }
  m = herm / tr.real();
  try {
    return DensityMatrix(m, basis);
  } catch (const InvariantViolation& e) {
    throw IntegrationFailure(std::string("evolve_oracle: ") + e.what());
  }
}

inline void check_oracle_step(const Superoperator& l, double dt) {
  if (!(dt > 0.0)) throw UsageError("evolve_oracle: dt must be > 0");
  const double limit = max_oracle_step(l);
  if (dt > limit * (1.0 + 1e-12)) {
    throw AccuracyError("evolve_oracle: dt = " + std::to_string(dt) + " exceeds 1e-2/Gamma_max = " +
                        std::to_string(limit));
  }
}

}  // namespace detail

/// rho(t) by RK4 on the vectorized master equation; result keeps rho0's basis.
inline DensityMatrix evolve_oracle(const DensityMatrix& rho0, const ModelParams& p, double t, double dt) {
  if (!(t >= 0.0)) throw UsageError("evolve_oracle: t must be >= 0");
  const Superoperator l = to_basis(build_generator(p), rho0.basis());
  detail::check_oracle_step(l, dt);
  if (t == 0.0) return rho0;
  const Vector16c y = detail::rk4_advance(l.matrix, ops::vec(rho0.matrix()), t, dt);
  return detail::finish_oracle_state(y, rho0.basis());
}

/// Same, with the default step for these parameters.
inline DensityMatrix evolve_oracle(const DensityMatrix& rho0, const ModelParams& p, double t) {
  const Superoperator l = build_generator(p);
  return evolve_oracle(rho0, p, t, default_oracle_step(l));
}

/// States at every time in `times` (non-decreasing), integrating once through the list.
inline std::vector<DensityMatrix> evolve_oracle_trajectory(const DensityMatrix& rho0, const ModelParams& p,
                                                           const std::vector<double>& times, double dt) {
  const Superoperator l = to_basis(build_generator(p), rho0.basis());
  detail::check_oracle_step(l, dt);
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  Vector16c y = ops::vec(rho0.matrix());
  double now = 0.0;
  for (double t : times) {
    if (!(t >= now)) throw UsageError("evolve_oracle_trajectory: times must be non-negative and sorted");
    y = detail::rk4_advance(l.matrix, y, t - now, dt);
    now = t;
    out.push_back(t == 0.0 ? rho0 : detail::finish_oracle_state(y, rho0.basis()));
  }
  return out;
}

}  // namespace tqb
