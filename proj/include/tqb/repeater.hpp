// repeater.hpp - Bennett purification map and the noisy purification loop F'(F).
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "tqb/core.hpp"
#include "tqb/couplings.hpp"
#include "tqb/solvers.hpp"

namespace tqb {

/// Output fidelity of one recurrence purification round.
inline double bennett_map(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("bennett_map: F must lie in [0, 1]");
  const double q = (1.0 - f) / 3.0;
  return (f * f + q * q) / (f * f + 2.0 * f * (1.0 - f) / 3.0 + 5.0 / 9.0 * (1.0 - f) * (1.0 - f));
}

/// F^2 |e1 g2><e1 g2| + (1 - F^2) |g1 e2><g1 e2|.
inline DensityMatrix input_state(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("input_state: F must lie in [0, 1]");
  Matrix4c m = Matrix4c::Zero();
  m(idx::eg, idx::eg) = f * f;
  m(idx::ge, idx::ge) = 1.0 - f * f;
  return DensityMatrix(m, Basis::Computational);
}

/// The channel is linear, so rho(F) evolves to F^2 rho_A(t) + (1 - F^2) rho_B(t)
/// with rho_A, rho_B the evolved |e1 g2> and |g1 e2> projectors.
struct UpDownChannel {
  Matrix4c evolved_eg = Matrix4c::Zero();
  Matrix4c evolved_ge = Matrix4c::Zero();

  static UpDownChannel identity() {
    UpDownChannel c;
    c.evolved_eg(idx::eg, idx::eg) = 1.0;
    c.evolved_ge(idx::ge, idx::ge) = 1.0;
    return c;
  }

  DensityMatrix output(double f) const {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("channel input F must lie in [0, 1]");
    return DensityMatrix(f * f * evolved_eg + (1.0 - f * f) * evolved_ge, Basis::Computational);
  }

  double noisy_fidelity(double f) const { return fidelity_updown(output(f)); }
  double f_prime(double f) const { return bennett_map(noisy_fidelity(f)); }
};

inline UpDownChannel make_channel(const ModelParams& p, double t, SolverKind solver = SolverKind::Oracle) {
  if (!(t >= 0.0)) throw UsageError("repeater: t must be >= 0");
  if (t == 0.0) return UpDownChannel::identity();
  const Evolver ev(p, solver);
  UpDownChannel c;
  c.evolved_eg = ev.evolve(states::eg().projector(), t).matrix();
  c.evolved_ge = ev.evolve(states::ge().projector(), t).matrix();
  return c;
}

struct PurificationCurve {
  std::vector<double> f;        // strictly increasing grid on [0.5, 1]
  std::vector<double> f_noisy;
  std::vector<double> f_prime;
  ModelParams params;
  double t = 0.0;
  UpDownChannel channel = UpDownChannel::identity();
  std::optional<double> f_max;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("repeater: F grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.5 && grid[i] <= 1.0)) throw UsageError("repeater: F grid must lie in [0.5, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw UsageError("repeater: F grid must be strictly increasing");
  }
}

inline constexpr double kCrossingZero = 1e-14;

// Bisection on g(F) = F'(F) - F with g(lo) and g(hi) of opposite sign.
inline double bisect_crossing(const UpDownChannel& ch, double lo, double hi) {
  const double glo = ch.f_prime(lo) - lo;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    const double gm = ch.f_prime(mid) - mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Largest F where F'(F) meets the diagonal coming from above; grid brackets
/// are refined by bisection to 1e-6.
inline std::optional<double> find_fmax(const PurificationCurve& c) {
  const auto& f = c.f;
  for (std::size_t k = f.size(); k-- > 0;) {
    const double g = c.f_prime[k] - f[k];
    if (std::abs(g) <= detail::kCrossingZero && k > 0 && c.f_prime[k - 1] - f[k - 1] > 0.0) return f[k];
    if (k + 1 < f.size() && g > detail::kCrossingZero) {
      const double gn = c.f_prime[k + 1] - f[k + 1];
      if (gn < -detail::kCrossingZero) return detail::bisect_crossing(c.channel, f[k], f[k + 1]);
    }
  }
  return std::nullopt;
}

/// Smallest F where F'(F) meets the diagonal coming from below (0.5 without noise).
inline std::optional<double> f_min(const PurificationCurve& c) {
  const auto& f = c.f;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double g = c.f_prime[k] - f[k];
    if (std::abs(g) <= detail::kCrossingZero && k + 1 < f.size() && c.f_prime[k + 1] - f[k + 1] > 0.0) return f[k];
    if (k + 1 < f.size() && g < -detail::kCrossingZero) {
      const double gn = c.f_prime[k + 1] - f[k + 1];
      if (gn > detail::kCrossingZero) return detail::bisect_crossing(c.channel, f[k], f[k + 1]);
    }
  }
  return std::nullopt;
}

inline PurificationCurve curve_from_channel(const UpDownChannel& ch, const std::vector<double>& grid,
                                            const ModelParams& p, double t) {
  detail::check_grid(grid);
  PurificationCurve c;
  c.params = p;
  c.t = t;
  c.channel = ch;
  c.f = grid;
  for (double f : grid) {
    const double fn = ch.noisy_fidelity(f);
    c.f_noisy.push_back(fn);
    c.f_prime.push_back(bennett_map(fn));
  }
  c.f_max = find_fmax(c);
  return c;
}

inline PurificationCurve noiseless_purification_curve(const std::vector<double>& grid) {
  return curve_from_channel(UpDownChannel::identity(), grid, ModelParams{}, 0.0);
}

/// rho(F) -> bath evolution for time t -> fidelity_updown -> bennett_map.
inline PurificationCurve noisy_purification_curve(const ModelParams& p, double t, const std::vector<double>& grid,
                                                  SolverKind solver = SolverKind::Oracle) {
  return curve_from_channel(make_channel(p, t, solver), grid, p, t);
}

}  // namespace tqb
