// couplings.hpp - bath and geometry coefficients of the two-qubit master equation.
//
// Units: hbar = k_B = 1. Both qubits are identical (Gamma_1 = Gamma_2 = Gamma,
// omega_1 = omega_2 = omega0), so Gamma_12 = Gamma F(k0 r12).
#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "tqb/errors.hpp"

namespace tqb {

struct ModelParams {
  double omega0 = 1.0;         // qubit transition frequency
  double gamma = 0.05;         // spontaneous emission rate
  double temperature = 0.0;    // bath temperature T
  double squeeze_r = 0.0;      // squeezing magnitude r
  double squeeze_phase = 0.0;  // squeezing phase Phi [rad]
  double k0_r12 = 1.5;         // inter-qubit distance in units of 1/k0
  double mu_dot_r = 0.0;       // cosine between dipole and separation axis

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!(finite(omega0) && finite(gamma) && finite(temperature) && finite(squeeze_r) &&
          finite(squeeze_phase) && finite(k0_r12) && finite(mu_dot_r))) {
      throw UsageError("model parameters must be finite");
    }
    if (!(omega0 > 0.0)) throw UsageError("omega0 must be > 0");
    if (!(gamma > 0.0)) throw UsageError("gamma must be > 0");
    if (temperature < 0.0) throw UsageError("temperature must be >= 0");
    if (k0_r12 < 0.0) throw UsageError("k0_r12 must be >= 0");
    if (mu_dot_r < -1.0 || mu_dot_r > 1.0) throw UsageError("mu_dot_r must lie in [-1, 1]");
  }

  bool is_vacuum() const { return temperature == 0.0 && squeeze_r == 0.0; }
};

struct DerivedCoefficients {
  double n_th = 0.0;       // Planck occupation at omega0
  double n_tilde = 0.0;    // effective thermal/squeezed occupation
  std::complex<double> m_tilde{0.0, 0.0};  // two-photon correlation, R e^{i Phi}
  double gamma12 = 0.0;    // collective incoherent rate
  double omega12 = 0.0;    // dipole-dipole coherent shift
};

/// 1/(exp(omega/T) - 1); exactly 0 at T = 0.
inline double planck_number(double omega, double temperature) {
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

inline double n_tilde(const ModelParams& p) {
  const double n = planck_number(p.omega0, p.temperature);
  const double c = std::cosh(p.squeeze_r), s = std::sinh(p.squeeze_r);
  return n * (c * c + s * s) + s * s;
}

inline std::complex<double> m_tilde(const ModelParams& p) {
  const double n = planck_number(p.omega0, p.temperature);
  return -0.5 * std::sinh(2.0 * p.squeeze_r) * (2.0 * n + 1.0) *
         std::polar(1.0, p.squeeze_phase);
}

/// Collective damping profile F(x), x = k0 r12.
///
/// Below x = 1e-3 the bracket cos x/x^2 - sin x/x^3 is replaced by its Taylor
/// series; the direct form loses every digit there.
inline double f_collective(double x, double mu_dot_r = 0.0) {
  if (x < 0.0) throw DomainError("f_collective: k0 r12 must be >= 0");
  const double mu2 = mu_dot_r * mu_dot_r;
  double sinc, bracket;
  if (x < 1e-3) {
    const double x2 = x * x;
    sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;
    bracket = -1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0 + x2 * x2 * x2 / 45360.0;
  } else {
    const double s = std::sin(x), c = std::cos(x);
    sinc = s / x;
    bracket = c / (x * x) - s / (x * x * x);
  }
  return 1.5 * ((1.0 - mu2) * sinc + (1.0 - 3.0 * mu2) * bracket);
}

inline double gamma12(const ModelParams& p) { return p.gamma * f_collective(p.k0_r12, p.mu_dot_r); }

/// Coherent dipole-dipole coupling; diverges as 1/x^3 for x -> 0.
inline double omega12(const ModelParams& p) {
  const double x = p.k0_r12;
  if (!(x > 0.0)) throw DomainError("omega12: dipole-dipole divergence at k0 r12 = 0");
  const double mu2 = p.mu_dot_r * p.mu_dot_r;
  const double s = std::sin(x), c = std::cos(x);
  return 0.75 * p.gamma *
         (-(1.0 - mu2) * c / x + (1.0 - 3.0 * mu2) * (s / (x * x) + c / (x * x * x)));
}

inline DerivedCoefficients derive(const ModelParams& p) {
  p.validate();
  DerivedCoefficients d;
  d.n_th = planck_number(p.omega0, p.temperature);
  d.n_tilde = n_tilde(p);
  d.m_tilde = m_tilde(p);
  d.gamma12 = gamma12(p);
  d.omega12 = omega12(p);
  return d;
}

}  // namespace tqb
