// core.hpp - two-qubit density matrices, basis changes and state functionals.
//
// Computational ordering: (|e1 e2>, |e1 g2>, |g1 e2>, |g1 g2>).
// Dressed ordering:       (|e>, |s>, |a>, |g>) with
//   |e> = |e1 e2>, |s> = (|e1 g2> + |g1 e2>)/sqrt2,
//   |a> = (|e1 g2> - |g1 e2>)/sqrt2, |g> = |g1 g2>.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tqb/errors.hpp"

namespace tqb {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Vector4c = Eigen::Matrix<Complex, 4, 1>;

inline constexpr double kTraceTolerance = 1e-9;
inline constexpr double kHermiticityTolerance = 1e-9;
inline constexpr double kPositivityTolerance = 1e-9;
inline constexpr double kNormTolerance = 1e-12;

enum class Basis { Computational, Dressed };

inline std::string_view to_string(Basis b) {
  return b == Basis::Computational ? "computational" : "dressed";
}

inline Basis basis_from_string(std::string_view s) {
  if (s == "computational") return Basis::Computational;
  if (s == "dressed") return Basis::Dressed;
  throw UsageError("unknown basis tag '" + std::string(s) + "'");
}

// Index names, usable for both orderings.
namespace idx {
inline constexpr int ee = 0, eg = 1, ge = 2, gg = 3;  // computational
inline constexpr int e = 0, s = 1, a = 2, g = 3;      // dressed
}  // namespace idx

/// Largest element-wise deviation |m - m^dagger|.
inline double hermiticity_defect(const Matrix4c& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of the Hermitian part of m.
inline double min_eigenvalue(const Matrix4c& m) {
  const Matrix4c h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Unit-trace, Hermitian, positive 4x4 matrix tagged with the basis it is written in.
///
/// Construction validates every invariant and throws InvariantViolation
/// otherwise, so any DensityMatrix in hand is physical to 1e-9.
class DensityMatrix {
 public:
  DensityMatrix(const Matrix4c& elements, Basis basis) : m_(elements), basis_(basis) {
    const Complex tr = m_.trace();
    if (std::abs(tr - Complex(1.0)) > kTraceTolerance) {
      throw InvariantViolation("density matrix trace " + std::to_string(tr.real()) +
                               (tr.imag() != 0.0 ? "+i" + std::to_string(tr.imag()) : "") +
                               " differs from 1");
    }
    if (hermiticity_defect(m_) > kHermiticityTolerance) {
      throw InvariantViolation("density matrix is not Hermitian");
    }
    const double lmin = min_eigenvalue(m_);
    if (lmin < -kPositivityTolerance) {
      throw InvariantViolation("density matrix has negative eigenvalue " + std::to_string(lmin));
    }
  }

  const Matrix4c& matrix() const noexcept { return m_; }
  Basis basis() const noexcept { return basis_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

  DensityMatrix retagged(Basis b) const { return DensityMatrix(m_, b); }

 private:
  Matrix4c m_;
  Basis basis_;
};

/// Normalized two-qubit ket.
class PureState {
 public:
  PureState(const Vector4c& amplitudes, Basis basis) : v_(amplitudes), basis_(basis) {
    if (std::abs(v_.norm() - 1.0) > kNormTolerance) {
      throw InvariantViolation("pure state norm " + std::to_string(v_.norm()) + " differs from 1");
    }
  }

  /// Normalizes an arbitrary nonzero vector.
  static PureState normalized(const Vector4c& v, Basis basis) {
    const double n = v.norm();
    if (!(n > 0.0)) throw UsageError("cannot normalize a zero vector");
    return PureState(v / n, basis);
  }

  const Vector4c& amplitudes() const noexcept { return v_; }
  Basis basis() const noexcept { return basis_; }

  DensityMatrix projector() const { return DensityMatrix(v_ * v_.adjoint(), basis_); }

 private:
  Vector4c v_;
  Basis basis_;
};

namespace detail {

// Real orthogonal involution mapping computational amplitudes to dressed
// ones. The same matrix is H_(as) (+) I_(eg) written in the dressed ordering.
inline const Matrix4c& dressed_unitary() {
  static const Matrix4c u = [] {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = r;
    m(1, 2) = r;
    m(2, 1) = r;
    m(2, 2) = -r;
    m(3, 3) = 1.0;
    return m;
  }();
  return u;
}

inline void require_basis(const DensityMatrix& rho, Basis expected, const char* op) {
  if (rho.basis() != expected) {
    throw UsageError(std::string(op) + ": expected " + std::string(to_string(expected)) +
                     " basis, got " + std::string(to_string(rho.basis())));
  }
}

inline Matrix4c conjugate_by(const Matrix4c& u, const Matrix4c& m) { return u * m * u.adjoint(); }

}  // namespace detail

/// Computational -> dressed basis, rho -> U rho U^dagger.
inline DensityMatrix dressed_transform(const DensityMatrix& rho) {
  detail::require_basis(rho, Basis::Computational, "dressed_transform");
  return DensityMatrix(detail::conjugate_by(detail::dressed_unitary(), rho.matrix()), Basis::Dressed);
}

/// Dressed -> computational basis.
inline DensityMatrix inverse_dressed_transform(const DensityMatrix& rho) {
  detail::require_basis(rho, Basis::Dressed, "inverse_dressed_transform");
  return DensityMatrix(detail::conjugate_by(detail::dressed_unitary().adjoint(), rho.matrix()),
                       Basis::Computational);
}

/// Applies H_(as) (+) I_(eg) to a dressed-basis matrix.
///
/// H maps |s> -> (|s>+|a>)/sqrt2 and |a> -> (|s>-|a>)/sqrt2. The rotated
/// frame is a product basis, so the result is tagged Computational for
/// entanglement analysis.
inline DensityMatrix hadamard_rotation(const DensityMatrix& rho) {
  detail::require_basis(rho, Basis::Dressed, "hadamard_rotation");
  return DensityMatrix(detail::conjugate_by(detail::dressed_unitary(), rho.matrix()),
                       Basis::Computational);
}

inline double purity(const DensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.matrix().cwiseAbs2().sum();
}

/// sqrt(<e1 g2| rho |e1 g2>), identifying |up,down> with |e1,g2>.
inline double fidelity_updown(const DensityMatrix& rho) {
  detail::require_basis(rho, Basis::Computational, "fidelity_updown");
  const double p = rho(idx::eg, idx::eg).real();
  if (p < -kPositivityTolerance) {
    throw InvariantViolation("negative population <e1g2|rho|e1g2> = " + std::to_string(p));
  }
  return std::sqrt(std::clamp(p, 0.0, 1.0));
}

/// Evenly spaced grid with `count` points from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw UsageError("grid count must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  if (count > 1) g.back() = hi;
  return g;
}


// Named states.
namespace states {

inline Vector4c basis_ket(int i) {
  Vector4c v = Vector4c::Zero();
  v(i) = 1.0;
  return v;
}

inline PureState ee() { return PureState(basis_ket(idx::ee), Basis::Computational); }
inline PureState eg() { return PureState(basis_ket(idx::eg), Basis::Computational); }
inline PureState ge() { return PureState(basis_ket(idx::ge), Basis::Computational); }
inline PureState gg() { return PureState(basis_ket(idx::gg), Basis::Computational); }

/// (|e1 g2> + |g1 e2>)/sqrt2.
inline PureState bell_symmetric() {
  Vector4c v = Vector4c::Zero();
  v(idx::eg) = v(idx::ge) = 1.0 / std::sqrt(2.0);
  return PureState(v, Basis::Computational);
}

inline DensityMatrix maximally_mixed(Basis b = Basis::Computational) {
  return DensityMatrix(Matrix4c::Identity() / 4.0, b);
}

}  // namespace states

}  // namespace tqb
