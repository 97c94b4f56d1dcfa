// acceptance - one PASS/FAIL line per acceptance criterion, with the measured values.
//
// Exit status is 0 only when every criterion passes.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tqb/entanglement.hpp"
#include "tqb/generator.hpp"
#include "tqb/pdf.hpp"
#include "tqb/repeater.hpp"
#include "tqb/solvers.hpp"

using namespace tqb;

namespace {

constexpr double kIndependent = 1.5;
constexpr double kCollectiveVacuum = 0.07;
constexpr double kCollectiveThermal = 0.08;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelParams params(double x, double temp = 0.0, double r = 0.0) {
  ModelParams p;
  p.k0_r12 = x;
  p.temperature = temp;
  p.squeeze_r = r;
  return p;
}

double max_diff(const Matrix4c& a, const Matrix4c& b) { return (a - b).cwiseAbs().maxCoeff(); }

const DensityMatrix& e1g2() {
  static const DensityMatrix rho = states::eg().projector();
  return rho;
}

// 1. vacuum concurrence golden values
Outcome vacuum_golden() {
  Outcome o;
  struct Case {
    double x, t, expect;
  };
  for (const Case& c : {Case{kIndependent, 5.0, 0.17}, Case{kCollectiveVacuum, 5.0, 0.42},
                        Case{kIndependent, 20.0, 0.32}, Case{kCollectiveVacuum, 20.0, 0.54}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const double conc = concurrence(evolve_oracle(e1g2(), params(c.x), c.t));
    const double secs = seconds_since(t0);
    o.require(std::abs(conc - c.expect) <= 0.02 && secs < 10.0,
              "x=" + fmt(c.x) + " t=" + fmt(c.t) + " C=" + fmt(conc) + " (want " + fmt(c.expect) + "+-0.02, " +
                  fmt(secs, 2) + "s)");
  }
  return o;
}

// 2. thermal golden values at t = 1, T = 10
Outcome thermal_golden() {
  Outcome o;
  const double ind = concurrence(evolve_oracle(e1g2(), params(kIndependent, 10.0), 1.0));
  o.require(ind == 0.0, "r=0 independent C=" + fmt(ind) + " (want 0)");
  const double col = concurrence(evolve_oracle(e1g2(), params(kCollectiveThermal, 10.0), 1.0));
  o.require(std::abs(col - 0.17) <= 0.03, "r=0 collective C=" + fmt(col) + " (want 0.17+-0.03)");
  for (double r : {0.5, 1.0}) {
    for (double x : {kIndependent, kCollectiveThermal}) {
      const double c = concurrence(evolve_oracle(e1g2(), params(x, 10.0, r), 1.0));
      o.require(c == 0.0, "r=" + fmt(r) + " x=" + fmt(x) + " C=" + fmt(c) + " (want 0)");
    }
  }
  return o;
}

// 3. oracle / vacuum closed form / block solver agree over a 3 x 3 x 2 grid
Outcome triangle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> times{0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
  const DensityMatrix rho0 = dressed_transform(e1g2());
  double worst_blocks = 0.0, worst_vacuum = 0.0;
  for (double temp : {0.0, 1.0, 10.0}) {
    for (double r : {0.0, 0.1, 1.0}) {
      for (double x : {kIndependent, kCollectiveThermal}) {
        const ModelParams p = params(x, temp, r);
        const auto oracle = evolve_oracle_trajectory(rho0, p, times, default_oracle_step(build_generator(p)));
        const BlockSolver blocks(p);
        for (std::size_t k = 0; k < times.size(); ++k) {
          worst_blocks = std::max(worst_blocks, max_diff(oracle[k].matrix(), blocks.evolve(rho0, times[k]).matrix()));
          if (p.is_vacuum()) {
            const Matrix4c v = evolve_vacuum(rho0, p, times[k]).matrix();
            worst_vacuum = std::max(worst_vacuum, max_diff(oracle[k].matrix(), v));
            worst_vacuum = std::max(worst_vacuum, max_diff(blocks.evolve(rho0, times[k]).matrix(), v));
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(worst_blocks < 1e-6, "oracle vs blocks max " + fmt(worst_blocks, 3));
  o.require(worst_vacuum < 1e-6, "vacuum vs oracle/blocks max " + fmt(worst_vacuum, 3));
  o.require(secs < 120.0, "runtime " + fmt(secs, 3) + "s");
  return o;
}

std::vector<ModelParams> physical_grid() {
  std::vector<ModelParams> out;
  for (double temp : {0.0, 1.0, 10.0})
    for (double r : {0.0, 0.5, 1.0})
      for (double x : {kIndependent, kCollectiveThermal}) out.push_back(params(x, temp, r));
  out.push_back(params(kCollectiveVacuum));
  return out;
}

// 4. physicality along trajectories
Outcome physicality() {
  Outcome o;
  const std::vector<double> times = linspace(0.0, 20.0, 50);
  double tr = 0.0, herm = 0.0, min_eig = 0.0, pop = 0.0;
  std::size_t n_states = 0;
  for (const ModelParams& p : physical_grid()) {
    for (const DensityMatrix& rho0 : {e1g2(), states::bell_symmetric().projector()}) {
      const auto traj = evolve_oracle_trajectory(rho0, p, times, default_oracle_step(build_generator(p)));
      for (const auto& rho : traj) {
        const Matrix4c& m = rho.matrix();
        tr = std::max(tr, std::abs(m.trace() - 1.0));
        herm = std::max(herm, hermiticity_defect(m));
        min_eig = std::min(min_eig, min_eigenvalue(m));
        double sum = 0.0;
        for (int i = 0; i < 4; ++i) sum += m(i, i).real();
        pop = std::max(pop, std::abs(sum - 1.0));
        ++n_states;
      }
    }
  }
  o.require(tr <= 1e-9, "trace dev " + fmt(tr, 3));
  o.require(herm <= 1e-9, "hermiticity dev " + fmt(herm, 3));
  o.require(min_eig >= -1e-7, "min eigenvalue " + fmt(min_eig, 3));
  o.require(pop <= 1e-9, "population sum dev " + fmt(pop, 3) + " over " + std::to_string(n_states) + " states");
  return o;
}

// 5. spectral weight identities
Outcome weights() {
  Outcome o;
  double worst_sum = 0.0;
  for (const ModelParams& p : physical_grid()) {
    const auto traj = evolve_oracle_trajectory(e1g2(), p, linspace(0.0, 20.0, 50), default_oracle_step(build_generator(p)));
    for (const auto& rho : traj) {
      const auto w = spectral_weights(rho).weights;
      worst_sum = std::max(worst_sum, std::abs(w[0] + w[1] + w[2] + w[3] - 1.0));
    }
  }
  o.require(worst_sum <= 1e-9, "sum of weights dev " + fmt(worst_sum, 3));
  for (double x : {kIndependent, kCollectiveVacuum}) {
    const ModelParams p = params(x);
    double w4 = 0.0;
    for (const auto& rho : evolve_oracle_trajectory(e1g2(), p, linspace(0.0, 10.0, 41), default_oracle_step(build_generator(p))))
      w4 = std::max(w4, spectral_weights(rho).weights[3]);
    o.require(w4 < 0.02, "x=" + fmt(x) + " max omega4(t<=10)=" + fmt(w4));
  }
  const auto w = spectral_weights(evolve_oracle(e1g2(), params(kIndependent), 5.0)).weights;
  const bool largest = w[1] >= w[0] && w[1] >= w[2] && w[1] >= w[3];
  o.require(largest, "independent t=5 weights (" + fmt(w[0]) + ", " + fmt(w[1]) + ", " + fmt(w[2]) + ", " +
                         fmt(w[3]) + "), omega2 largest");
  return o;
}

double two_sample_p(const Histogram& a, const Histogram& b) {
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    const double x = static_cast<double>(a.counts[i]), y = static_cast<double>(b.counts[i]);
    if (x + y == 0.0) continue;
    chi2 += (x - y) * (x - y) / (x + y);
    ++dof;
  }
  return boost::math::gamma_q(0.5 * dof, 0.5 * chi2);
}

// 6. PDF estimator properties
Outcome pdf_properties() {
  Outcome o;
  const std::size_t n = 1000000;
  struct Case {
    double x, expect;
  };
  for (const Case& c : {Case{kIndependent, 0.48}, Case{kCollectiveThermal, 0.98}}) {
    const DensityMatrix rho = evolve_oracle(e1g2(), params(c.x, 10.0, 0.5), 1.0);
    const EntanglementPDF pdf = pdf_estimate(rho, n, 200, 0);
    double worst = 0.0;
    for (int m = 2; m <= 4; ++m) worst = std::max(worst, std::abs(pdf.histogram(m).integral() - 1.0));
    o.require(worst <= 0.01, "x=" + fmt(c.x) + " histogram integral dev " + fmt(worst, 3));
    const EntanglementPDF again = pdf_estimate(rho, n, 200, 0, 4);
    bool same = true;
    for (int m = 2; m <= 4; ++m) same = same && pdf.histogram(m).counts == again.histogram(m).counts;
    o.require(same, "x=" + fmt(c.x) + " fixed-seed rerun bit-identical (1 vs 4 threads)");
    const PdfFeatures f = pdf_features(pdf);
    const bool ok = f.e_perp && std::abs(*f.e_perp - c.expect) <= 0.05;
    o.require(ok, "x=" + fmt(c.x) + " E_perp=" + (f.e_perp ? fmt(*f.e_perp) : std::string("absent")) + " (want " +
                      fmt(c.expect) + "+-0.05)");
  }
  const EntanglementPDF a = pdf_estimate(states::maximally_mixed(), n, 200, 1);
  const EntanglementPDF b = pdf_estimate(states::maximally_mixed(), n, 200, 2);
  const double pv = two_sample_p(a.histogram(4), b.histogram(4));
  o.require(pv > 0.01, "P4 two-seed chi-square p=" + fmt(pv));
  return o;
}

// 7. convexity bound on the test grid
Outcome convexity() {
  Outcome o;
  double min_slack = 1e9;
  std::size_t n_states = 0, violations = 0;
  std::vector<ModelParams> grid = physical_grid();
  for (const ModelParams& p : grid) {
    for (double t : {1.0, 5.0, 20.0}) {
      const DensityMatrix rho = evolve_oracle(e1g2(), p, t);
      const EntanglementPDF pdf = pdf_estimate(rho, 200000, 200, 0);
      const BoundCheck bc = concurrence_bound_check(rho, pdf.spectrum, pdf_features(pdf));
      min_slack = std::min(min_slack, bc.slack);
      violations += bc.holds ? 0 : 1;
      ++n_states;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " violations over " + std::to_string(n_states) +
                                 " states, min slack " + fmt(min_slack));
  return o;
}

// 8. repeater loop
Outcome repeater() {
  Outcome o;
  const PurificationCurve clean = noiseless_purification_curve(linspace(0.5, 1.0, 501));
  bool above = true;
  for (std::size_t k = 1; k + 1 < clean.f.size(); ++k) above = above && clean.f_prime[k] > clean.f[k];
  const auto lo = f_min(clean);
  o.require(clean.f_max && *clean.f_max == 1.0 && lo && *lo == 0.5 && above,
            "noiseless fixed points {" + (lo ? fmt(*lo) : std::string("-")) + ", " +
                (clean.f_max ? fmt(*clean.f_max) : std::string("-")) + "}, F'>F inside");
  const auto grid = linspace(0.5, 1.0, 51);
  const PurificationCurve zero = noisy_purification_curve(params(kIndependent), 0.0, grid);
  const PurificationCurve ref = noiseless_purification_curve(grid);
  double dev = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) dev = std::max(dev, std::abs(zero.f_prime[k] - ref.f_prime[k]));
  o.require(dev <= 1e-12, "t=0 vs noiseless dev " + fmt(dev, 3));
  const double f3 = make_channel(params(kIndependent), 3.0).f_prime(1.0);
  const double f10 = make_channel(params(kIndependent), 10.0).f_prime(1.0);
  o.require(f10 <= f3 && f3 < 1.0, "F'_10(1)=" + fmt(f10, 6) + " <= F'_3(1)=" + fmt(f3, 6) + " < 1");
  return o;
}

// 9. Dicke limit: the antisymmetric state is dark
Outcome dicke() {
  Outcome o;
  const ModelParams p = params(1e-3);
  const DensityMatrix rho0 = dressed_transform(e1g2());
  const double aa0 = rho0(idx::a, idx::a).real();
  double worst = 0.0;
  for (double t : linspace(0.0, 1.0 / p.gamma, 101)) {
    worst = std::max(worst, std::abs(evolve_vacuum(rho0, p, t)(idx::a, idx::a).real() - aa0) / aa0);
  }
  o.require(worst <= 0.01, "max relative change of rho_aa " + fmt(worst, 3));
  return o;
}

// 10. fourth-order convergence of the RK4 oracle
Outcome rk4() {
  Outcome o;
  const ModelParams p = params(kIndependent, 1.0, 0.1);
  const double h = 4e-3;
  const DensityMatrix rho0 = e1g2();
  const Matrix4c a = evolve_oracle(rho0, p, 5.0, h).matrix();
  const Matrix4c b = evolve_oracle(rho0, p, 5.0, h / 2).matrix();
  const Matrix4c ref = evolve_oracle(rho0, p, 5.0, h / 4).matrix();
  const double ratio = max_diff(a, ref) / max_diff(b, ref);
  o.require(std::abs(ratio - 16.0) <= 4.0, "error ratio " + fmt(ratio) + " at dt=" + fmt(h));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"vacuum concurrence golden values", vacuum_golden},
      {"thermal concurrence golden values", thermal_golden},
      {"oracle/analytic/block triangle", triangle},
      {"physicality suite", physicality},
      {"weight identities", weights},
      {"pdf estimator properties", pdf_properties},
      {"convexity bound", convexity},
      {"repeater", repeater},
      {"Dicke limit", dicke},
      {"RK4 convergence", rk4}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::string detail = o.detail.str();
    if (detail.size() >= 2 && detail.substr(detail.size() - 2) == "; ") detail.resize(detail.size() - 2);
    std::printf("%s %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
