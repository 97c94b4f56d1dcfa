// entanglement.hpp - concurrence, spectral weights and the nested-projector decomposition.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "tqb/core.hpp"

namespace tqb {

namespace detail {

// sigma_y (x) sigma_y is real: it maps |ee> <-> -|gg>, |eg> <-> |ge>.
inline const Eigen::Matrix4d& spin_flip() {
  static const Eigen::Matrix4d y = [] {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 3) = m(3, 0) = -1.0;
    m(1, 2) = m(2, 1) = 1.0;
    return m;
  }();
  return y;
}

}  // namespace detail

/// 2 |c_ee c_gg - c_eg c_ge| for computational amplitudes (need not be normalized).
inline double pure_concurrence(const Vector4c& c) {
  return 2.0 * std::abs(c(idx::ee) * c(idx::gg) - c(idx::eg) * c(idx::ge));
}

inline double pure_concurrence(const PureState& psi) {
  if (psi.basis() != Basis::Computational) {
    throw UsageError("pure_concurrence: expected computational basis, got " + std::string(to_string(psi.basis())));
  }
  return pure_concurrence(psi.amplitudes());
}

/// Wootters concurrence of a computational-basis state.
///
/// The eigenvalues of rho rho~ are the squared singular values of
/// tau = W^T (sy x sy) W with rho = W W^dagger, which stays accurate when rho
/// is rank deficient.
inline double concurrence(const DensityMatrix& rho) {
  detail::require_basis(rho, Basis::Computational, "concurrence");
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  const Eigen::Vector4d lam = es.eigenvalues();
  if (lam.minCoeff() < -1e-8) {
    throw NumericalError("concurrence: density matrix eigenvalue " + std::to_string(lam.minCoeff()) + " < -1e-8");
  }
  Matrix4c w = es.eigenvectors();
  for (int k = 0; k < 4; ++k) w.col(k) *= std::sqrt(std::max(lam(k), 0.0));
  const Matrix4c tau = w.transpose() * detail::spin_flip().cast<Complex>() * w;
  Eigen::JacobiSVD<Matrix4c> svd(tau);
  const Eigen::Vector4d s = svd.singularValues();  // descending
  return std::max(0.0, s(0) - s(1) - s(2) - s(3));
}

/// Sorted spectrum with nested projectors Pi_M = sum_{j<=M} |psi_j><psi_j|.
struct SpectralDecomposition {
  Eigen::Vector4d eigenvalues;            // lambda_1 >= ... >= lambda_4 >= 0
  Matrix4c eigenvectors;                  // column j is psi_{j+1}
  std::array<double, 4> weights{};        // omega_M = (lambda_M - lambda_{M+1}) / lambda_1
  Basis basis = Basis::Computational;

  /// Orthonormal frame of Pi_M (first M eigenvectors).
  Eigen::Matrix<Complex, 4, Eigen::Dynamic> frame(int m) const {
    if (m < 1 || m > 4) throw UsageError("frame: M must lie in 1..4");
    return eigenvectors.leftCols(m);
  }

  Matrix4c projector(int m) const {
    const auto f = frame(m);
    return f * f.adjoint();
  }

  PureState eigenstate(int j) const { return PureState(eigenvectors.col(j), basis); }
};

inline SpectralDecomposition spectral_weights(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  struct Pair {
    double lambda;
    Vector4c v;
  };
  std::vector<Pair> pairs;
  for (int k = 0; k < 4; ++k) {
    Vector4c v = es.eigenvectors().col(k);
    // fix the global phase: first non-negligible component real positive
    for (int i = 0; i < 4; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    }
    pairs.push_back({std::max(es.eigenvalues()(k), 0.0), v});
  }
  auto lex_less = [](const Vector4c& a, const Vector4c& b) {
    for (int i = 0; i < 4; ++i) {
      if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    }
    return false;
  };
  std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (std::abs(a.lambda - b.lambda) > 1e-12) return a.lambda > b.lambda;
    return lex_less(a.v, b.v);
  });

  SpectralDecomposition sd;
  sd.basis = rho.basis();
  for (int k = 0; k < 4; ++k) {
    sd.eigenvalues(k) = pairs[static_cast<std::size_t>(k)].lambda;
    sd.eigenvectors.col(k) = pairs[static_cast<std::size_t>(k)].v;
  }
  const double l1 = sd.eigenvalues(0);
  for (int m = 0; m < 4; ++m) {
    const double next = m < 3 ? sd.eigenvalues(m + 1) : 0.0;
    sd.weights[static_cast<std::size_t>(m)] = (sd.eigenvalues(m) - next) / l1;
  }
  return sd;
}

/// Takagi values of the symmetric form (sy x sy) restricted to span(frame), descending.
///
/// For a unit vector c in the subspace, pure_concurrence(F c) = |c^T B c| with
/// B = F^T (sy x sy) F; its extremes and kinks sit at these values.
inline Eigen::VectorXd subspace_takagi_values(const Eigen::Matrix<Complex, 4, Eigen::Dynamic>& frame) {
  const Eigen::MatrixXcd b = frame.transpose() * detail::spin_flip().cast<Complex>() * frame;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(b);
  return svd.singularValues();
}

}  // namespace tqb
