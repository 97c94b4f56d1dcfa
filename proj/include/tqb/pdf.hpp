// pdf.hpp - Haar sampling on eigen-subspaces and the entanglement density P(E).
//
// Random numbers are counter based: sample j of stream M is a pure function of
// (seed, M, j), so results do not depend on how samples are split across threads.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "tqb/core.hpp"
#include "tqb/entanglement.hpp"

namespace tqb {

using Frame = Eigen::Matrix<Complex, 4, Eigen::Dynamic>;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stateless generator: draw(j, i) is the i-th variate of sample j.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  /// Uniform on (0, 1].
  double uniform(std::uint64_t j, std::uint64_t i) const {
    const std::uint64_t x = splitmix64(splitmix64(key_ ^ j) + i * 0x9e3779b97f4a7c15ULL);
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard complex Gaussian (real and imaginary parts each N(0, 1)), Box-Muller.
  Complex complex_normal(std::uint64_t j, std::uint64_t i) const {
    const double u1 = uniform(j, 2 * i), u2 = uniform(j, 2 * i + 1);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

 private:
  std::uint64_t key_;
};

/// Haar-random unit vector in span(frame) for sample index j.
inline Vector4c haar_sample(const Frame& frame, const CounterRng& rng, std::uint64_t j) {
  const Eigen::Index k = frame.cols();
  Eigen::VectorXcd c(k);
  for (Eigen::Index i = 0; i < k; ++i) c(i) = rng.complex_normal(j, static_cast<std::uint64_t>(i));
  c /= c.norm();
  return frame * c;
}

/// n Haar-distributed pure states in the subspace spanned by an orthonormal k-frame.
inline std::vector<PureState> sample_subspace(const Frame& frame, std::size_t n, std::uint64_t seed,
                                              Basis basis = Basis::Computational, std::uint64_t stream = 0) {
  if (frame.cols() < 1 || frame.cols() > 4) throw UsageError("sample_subspace: frame must have 1..4 columns");
  const Eigen::MatrixXcd gram = frame.adjoint() * frame;
  if ((gram - Eigen::MatrixXcd::Identity(frame.cols(), frame.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw UsageError("sample_subspace: frame is not orthonormal");
  }
  const CounterRng rng(seed, stream);
  std::vector<PureState> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.push_back(PureState::normalized(haar_sample(frame, rng, j), basis));
  }
  return out;
}

struct Histogram {
  int m = 0;                        // subspace dimension
  double weight = 0.0;              // omega_M
  std::vector<double> edges;        // n_bins + 1 edges over [0, 1]
  std::vector<std::uint64_t> counts;
  std::vector<double> density;      // counts / (n * width)

  std::size_t bins() const { return counts.size(); }
  double width() const { return edges[1] - edges[0]; }
  double integral() const {
    double s = 0.0;
    for (std::size_t b = 0; b < density.size(); ++b) s += density[b] * (edges[b + 1] - edges[b]);
    return s;
  }
};

struct EntanglementPDF {
  double delta_weight = 0.0;    // omega_1
  double delta_location = 0.0;  // E(psi_1)
  std::array<Histogram, 3> histograms;  // M = 2, 3, 4
  std::size_t sample_count = 0;         // per subspace
  std::uint64_t seed = 0;
  SpectralDecomposition spectrum;

  const Histogram& histogram(int m) const {
    if (m < 2 || m > 4) throw UsageError("histogram: M must lie in 2..4");
    return histograms[static_cast<std::size_t>(m - 2)];
  }

  double total_weight() const {
    return delta_weight + histograms[0].weight + histograms[1].weight + histograms[2].weight;
  }

  /// Continuous part sum_M omega_M P_M(E); the point mass is reported separately.
  std::vector<double> continuous_density() const {
    std::vector<double> d(histograms[0].bins(), 0.0);
    for (const auto& h : histograms)
      for (std::size_t b = 0; b < d.size(); ++b) d[b] += h.weight * h.density[b];
    return d;
  }
};

namespace detail {

inline Histogram sample_histogram(const Frame& frame, int m, double weight, std::size_t n, int n_bins,
                                  std::uint64_t seed, unsigned threads) {
  Histogram h;
  h.m = m;
  h.weight = weight;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int b = 0; b <= n_bins; ++b) h.edges[static_cast<std::size_t>(b)] = static_cast<double>(b) / n_bins;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);

  const CounterRng rng(seed, static_cast<std::uint64_t>(m));
  threads = std::max(1u, threads);
  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(h.counts.size(), 0));
  auto work = [&](unsigned w) {
    const std::size_t lo = n * w / threads, hi = n * (w + 1) / threads;
    auto& counts = partial[w];
    for (std::size_t j = lo; j < hi; ++j) {
      const double e = pure_concurrence(haar_sample(frame, rng, j));
      auto b = static_cast<long>(e * n_bins);
      b = std::clamp(b, 0L, static_cast<long>(n_bins) - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& p : partial)
    for (std::size_t b = 0; b < p.size(); ++b) h.counts[b] += p[b];

  const double width = 1.0 / n_bins;
  h.density.resize(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    h.density[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(n) * width);
  }
  return h;
}

}  // namespace detail

/// Nested-projector PDF of rho (computational basis): a point mass for Pi_1 and
/// Haar histograms for Pi_2, Pi_3, Pi_4.
inline EntanglementPDF pdf_estimate(const DensityMatrix& rho, std::size_t n_samples = 1000000, int n_bins = 200,
                                    std::uint64_t seed = 0, unsigned threads = 1) {
  detail::require_basis(rho, Basis::Computational, "pdf_estimate");
  if (n_samples < 1) throw UsageError("pdf_estimate: n_samples must be >= 1");
  if (n_bins < 1) throw UsageError("pdf_estimate: n_bins must be >= 1");
  EntanglementPDF pdf;
  pdf.spectrum = spectral_weights(rho);
  pdf.sample_count = n_samples;
  pdf.seed = seed;
  pdf.delta_weight = pdf.spectrum.weights[0];
  pdf.delta_location = pure_concurrence(Vector4c(pdf.spectrum.eigenvectors.col(0)));
  for (int m = 2; m <= 4; ++m) {
    pdf.histograms[static_cast<std::size_t>(m - 2)] = detail::sample_histogram(
        pdf.spectrum.frame(m), m, pdf.spectrum.weights[static_cast<std::size_t>(m - 1)], n_samples, n_bins, seed,
        threads);
  }
  return pdf;
}

struct PdfFeatures {
  double e_max = 0.0;                 // max concurrence on Pi_2
  std::optional<double> e_cusp;       // modal bin of P_2; absent for a flat histogram
  std::optional<double> e_perp;       // slope break of P_3
  double c_pi2 = 0.0;                 // (e_max - e_cusp)/2, or e_max/2 when the cusp is absent
  double cusp_significance = 0.0;     // (mode - median) in Poisson sigmas
  double perp_significance = 0.0;     // slope drop in standard errors (positive)
};

/// Largest pure_concurrence on the unit sphere of a two-dimensional subspace:
/// a 100 x 100 grid over (theta, phi) refined by compass search to 1e-6.
inline double max_concurrence_2d(const Frame& frame) {
  if (frame.cols() != 2) throw UsageError("max_concurrence_2d: frame must have 2 columns");
  const Vector4c a = frame.col(0), b = frame.col(1);
  auto f = [&](double th, double ph) {
    return pure_concurrence(Vector4c(std::cos(th) * a + std::polar(std::sin(th), ph) * b));
  };
  const int n = 100;
  const double dth = 0.5 * std::numbers::pi / (n - 1), dph = 2.0 * std::numbers::pi / n;
  double best = -1.0, bth = 0.0, bph = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = f(i * dth, j * dph);
      if (v > best) {
        best = v;
        bth = i * dth;
        bph = j * dph;
      }
    }
  }
  double step_th = dth, step_ph = dph;
  while (step_th > 1e-6 || step_ph > 1e-6) {
    bool moved = false;
    const std::array<std::array<double, 2>, 4> dirs{{{step_th, 0.0}, {-step_th, 0.0}, {0.0, step_ph}, {0.0, -step_ph}}};
    for (const auto& d : dirs) {
      const double v = f(bth + d[0], bph + d[1]);
      if (v > best) {
        best = v;
        bth += d[0];
        bph += d[1];
        moved = true;
      }
    }
    if (!moved) {
      step_th *= 0.5;
      step_ph *= 0.5;
    }
  }
  return std::min(best, 1.0);
}

namespace detail {

inline std::optional<double> estimate_cusp(const Histogram& h, double& significance) {
  std::vector<std::uint64_t> occupied;
  for (auto c : h.counts)
    if (c > 0) occupied.push_back(c);
  significance = 0.0;
  if (occupied.size() < 3) return std::nullopt;
  std::nth_element(occupied.begin(), occupied.begin() + static_cast<long>(occupied.size() / 2), occupied.end());
  const double median = static_cast<double>(occupied[occupied.size() / 2]);
  const auto mode_it = std::max_element(h.counts.begin(), h.counts.end());
  const auto b = static_cast<std::size_t>(mode_it - h.counts.begin());
  significance = (static_cast<double>(*mode_it) - median) / std::sqrt(std::max(median, 1.0));
  if (significance <= 8.0) return std::nullopt;
  return 0.5 * (h.edges[b] + h.edges[b + 1]);
}

struct LineFit {
  double slope = 0.0, se = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  double sx = 0, sy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double r = y[i] - (my + fit.slope * (x[i] - mx));
    rss += r * r;
  }
  const double dof = std::max(1.0, n - 2.0);
  fit.se = std::sqrt(rss / dof / sxx);
  return fit;
}

// P_3 vanishes like sqrt(1 - E) near E = 1 and bends at E_perp. Dividing by
// the bin average of sqrt(1 - E) flattens the edge, then the bend shows up as
// the most significant drop between local line fits on either side.
inline std::optional<double> estimate_perp(const Histogram& h, double& significance) {
  const std::size_t n = h.bins();
  const std::size_t window = 10, min_window = 3;
  significance = 0.0;
  if (n < 2 * min_window) return std::nullopt;
  std::vector<double> x(n), y(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double lo = h.edges[b], hi = h.edges[b + 1];
    const double env = (2.0 / 3.0) * (std::pow(1.0 - lo, 1.5) - std::pow(std::max(0.0, 1.0 - hi), 1.5)) / (hi - lo);
    x[b] = 0.5 * (lo + hi);
    y[b] = h.density[b] / env;
  }
  double best_z = std::numeric_limits<double>::infinity();
  std::size_t best_edge = 0;
  for (std::size_t e = min_window; e + min_window <= n; ++e) {
    const LineFit left = fit_line(x, y, e >= window ? e - window : 0, e);
    const LineFit right = fit_line(x, y, e, std::min(n, e + window));
    const double se = std::sqrt(left.se * left.se + right.se * right.se);
    if (!(se > 0.0)) continue;
    const double z = (right.slope - left.slope) / se;
    if (z < best_z) {
      best_z = z;
      best_edge = e;
    }
  }
  if (!std::isfinite(best_z)) return std::nullopt;
  significance = -best_z;
  if (significance < 3.0) return std::nullopt;
  return h.edges[best_edge];
}

}  // namespace detail

inline PdfFeatures pdf_features(const EntanglementPDF& pdf) {
  PdfFeatures f;
  f.e_max = max_concurrence_2d(pdf.spectrum.frame(2));
  f.e_cusp = detail::estimate_cusp(pdf.histogram(2), f.cusp_significance);
  if (f.e_cusp && *f.e_cusp > f.e_max) f.e_cusp = f.e_max;
  f.c_pi2 = f.e_cusp ? 0.5 * (f.e_max - *f.e_cusp) : 0.5 * f.e_max;
  f.e_perp = detail::estimate_perp(pdf.histogram(3), f.perp_significance);
  return f;
}

struct BoundCheck {
  bool holds = false;
  double concurrence = 0.0;
  double bound = 0.0;  // includes the 0.02 estimator tolerance
  double slack = 0.0;  // bound - concurrence
};

/// C(rho) <= (l1 - l2) C(psi_1) + (l2 - l3) C(Pi_2) + 0.02, where C(Pi_2) is the
/// concurrence of the unnormalized projector, 2 c_pi2.
inline BoundCheck concurrence_bound_check(const DensityMatrix& rho, const SpectralDecomposition& sd,
                                          const PdfFeatures& f) {
  BoundCheck r;
  r.concurrence = concurrence(rho);
  const auto& l = sd.eigenvalues;
  const double c1 = pure_concurrence(Vector4c(sd.eigenvectors.col(0)));
  r.bound = (l(0) - l(1)) * c1 + (l(1) - l(2)) * 2.0 * f.c_pi2 + 0.02;
  r.slack = r.bound - r.concurrence;
  r.holds = r.slack >= 0.0;
  return r;
}

}  // namespace tqb
