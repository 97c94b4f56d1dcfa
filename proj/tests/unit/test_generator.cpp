#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tqb/generator.hpp"

using namespace tqb;

namespace {

oracle::Params to_oracle(const ModelParams& p) {
  return {p.omega0, p.gamma, p.temperature, p.squeeze_r, p.squeeze_phase, p.k0_r12, p.mu_dot_r};
}

ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  p.omega0 = 0.5 + u(rng);
  p.gamma = 0.01 + 0.1 * u(rng);
  p.temperature = 3.0 * u(rng);
  p.squeeze_r = 1.2 * u(rng);
  p.squeeze_phase = 6.0 * u(rng);
  p.k0_r12 = 0.05 + 3.0 * u(rng);
  p.mu_dot_r = 2.0 * u(rng) - 1.0;
  return p;
}

double max_diff(const Matrix4c& a, const Matrix4c& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Generator, MatchesElementwiseOracle) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const ModelParams p = random_params(rng);
    const Matrix16c l = build_generator(p).matrix;
    const auto o = oracle::generator(to_oracle(p));
    // the oracle is column-major: index i + 4 j
    double worst = 0.0;
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b) {
        const int ra = 4 * (a % 4) + a / 4, rb = 4 * (b % 4) + b / 4;
        worst = std::max(worst, std::abs(l(ra, rb) - o(a, b)));
      }
    EXPECT_LT(worst, 1e-13);
  }
}

TEST(Generator, TracePreserving) {
  std::mt19937_64 rng(8);
  Vector16c trace_row = ops::vec(Matrix4c::Identity());
  for (int k = 0; k < 20; ++k) {
    const ModelParams p = random_params(rng);
    for (Basis b : {Basis::Computational, Basis::Dressed}) {
      const Matrix16c l = to_basis(build_generator(p), b).matrix;
      EXPECT_LT((trace_row.adjoint() * l).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, l.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Generator, HermiticityPreserving) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const ModelParams p = random_params(rng);
    const Superoperator l = build_generator(p);
    Matrix4c h = oracle::random_density(rng);
    h(0, 2) += Complex(0.3, -0.1);
    h(2, 0) = std::conj(h(0, 2));
    const Matrix4c d = ops::unvec(l.matrix * ops::vec(h));
    EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Generator, DoublyExcitedDecaysAtTwiceGamma) {
  ModelParams p;  // vacuum
  const Superoperator l = build_generator(p);
  // d rho_ee/dt = -2 Gamma rho_ee when only |ee> is populated
  Matrix4c ee = Matrix4c::Zero();
  ee(0, 0) = 1.0;
  const Matrix4c d = ops::unvec(l.matrix * ops::vec(ee));
  EXPECT_NEAR(d(0, 0).real(), -2.0 * p.gamma, 1e-15);
  const DensityMatrix rho = evolve_oracle(states::ee().projector(), p, 5.0, 1e-3);
  EXPECT_NEAR(rho(0, 0).real(), std::exp(-2.0 * p.gamma * 5.0), 1e-10);
}

TEST(Generator, FarApartQubitsFactorize) {
  // With Gamma12 and Omega12 negligible the generator is a sum of two
  // single-qubit amplitude-damping generators.
  ModelParams p;
  p.k0_r12 = 1e9;
  const Matrix16c l = build_generator(p).matrix;
  EXPECT_LT(std::abs(gamma12(p)), 1e-9);
  // |e1 g2> decays only into |g1 g2>
  Matrix4c eg = Matrix4c::Zero();
  eg(1, 1) = 1.0;
  const Matrix4c d = ops::unvec(l * ops::vec(eg));
  EXPECT_NEAR(d(1, 1).real(), -p.gamma, 1e-12);
  EXPECT_NEAR(d(3, 3).real(), p.gamma, 1e-12);
  EXPECT_NEAR(std::abs(d(2, 2)), 0.0, 1e-12);
}

TEST(Basis, DressedGeneratorRoundTrips) {
  std::mt19937_64 rng(10);
  const ModelParams p = random_params(rng);
  const Superoperator c = build_generator(p);
  const Superoperator back = to_basis(to_basis(c, Basis::Dressed), Basis::Computational);
  EXPECT_LT((back.matrix - c.matrix).cwiseAbs().maxCoeff(), 1e-13);
  // acting in either basis commutes with the basis change
  const DensityMatrix rho(oracle::random_density(rng), Basis::Computational);
  const Matrix4c dc = ops::unvec(c.matrix * ops::vec(rho.matrix()));
  const Matrix4c dd = ops::unvec(to_basis(c, Basis::Dressed).matrix * ops::vec(dressed_transform(rho).matrix()));
  EXPECT_LT(max_diff(oracle::to_dressed(dc), dd), 1e-13);
}

TEST(Oracle, ZeroTimeIsExact) {
  ModelParams p;
  p.temperature = 1.0;
  const DensityMatrix rho0 = states::bell_symmetric().projector();
  EXPECT_EQ(evolve_oracle(rho0, p, 0.0, 1e-3).matrix(), rho0.matrix());
}

TEST(Oracle, MatchesMatrixExponential) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 6; ++k) {
    const ModelParams p = random_params(rng);
    const DensityMatrix rho0(oracle::random_density(rng), Basis::Computational);
    const double dt = default_oracle_step(build_generator(p));
    const DensityMatrix rho = evolve_oracle(rho0, p, 3.7, dt);
    EXPECT_LT(max_diff(rho.matrix(), oracle::evolve(to_oracle(p), rho0.matrix(), 3.7)), 1e-9);
  }
}

TEST(Oracle, DressedInputStaysDressed) {
  ModelParams p;
  p.temperature = 0.5;
  p.squeeze_r = 0.2;
  const DensityMatrix c0 = states::eg().projector();
  const DensityMatrix d = evolve_oracle(dressed_transform(c0), p, 2.0, 1e-3);
  const DensityMatrix c = evolve_oracle(c0, p, 2.0, 1e-3);
  EXPECT_EQ(d.basis(), Basis::Dressed);
  EXPECT_LT(max_diff(d.matrix(), dressed_transform(c).matrix()), 1e-12);
}

TEST(Oracle, RejectsCoarseStep) {
  ModelParams p;
  p.k0_r12 = 0.07;  // Omega12 ~ 109, so 1e-3 is too coarse
  EXPECT_THROW(evolve_oracle(states::eg().projector(), p, 1.0, 1e-3), AccuracyError);
  EXPECT_THROW(evolve_oracle(states::eg().projector(), p, 1.0, -1.0), UsageError);
  EXPECT_NO_THROW(evolve_oracle(states::eg().projector(), p, 1.0));
}

TEST(Oracle, DefaultStepIsOneMillisecondForStandardProfile) {
  ModelParams p;
  EXPECT_DOUBLE_EQ(default_oracle_step(build_generator(p)), 1e-3);
  p.k0_r12 = 0.07;
  const Superoperator l = build_generator(p);
  EXPECT_LE(default_oracle_step(l), max_oracle_step(l));
}

TEST(Oracle, SqueezedThermalKeepsTrace) {
  ModelParams p;
  p.temperature = 1.0;
  p.squeeze_r = 0.1;
  for (double t : {1.0, 5.0, 20.0}) {
    const DensityMatrix rho = evolve_oracle(states::eg().projector(), p, t, 1e-3);
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-9);
  }
}

TEST(Oracle, PhysicalOverTime) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 4; ++k) {
    const ModelParams p = random_params(rng);
    const DensityMatrix rho0(oracle::random_density(rng, 2), Basis::Computational);
    const double dt = default_oracle_step(build_generator(p));
    const auto traj = evolve_oracle_trajectory(rho0, p, linspace(0.0, 20.0, 21), dt);
    for (const auto& rho : traj) {
      EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-9);
      EXPECT_LT(hermiticity_defect(rho.matrix()), 1e-9);
      EXPECT_GE(min_eigenvalue(rho.matrix()), -1e-7);
    }
  }
}

TEST(Oracle, TrajectoryMatchesIndependentRuns) {
  ModelParams p;
  p.temperature = 1.0;
  const std::vector<double> times{0.0, 0.5, 2.25, 5.0};
  const auto traj = evolve_oracle_trajectory(states::eg().projector(), p, times, 1e-3);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix single = evolve_oracle(states::eg().projector(), p, times[k], 1e-3);
    EXPECT_LT(max_diff(traj[k].matrix(), single.matrix()), 1e-10);
  }
  EXPECT_THROW(evolve_oracle_trajectory(states::eg().projector(), p, {1.0, 0.5}, 1e-3), UsageError);
}

TEST(Oracle, FourthOrderConvergence) {
  ModelParams p;
  p.temperature = 1.0;
  p.squeeze_r = 0.1;
  const DensityMatrix rho0 = states::eg().projector();
  const double h = 4e-3;
  const Matrix4c a = evolve_oracle(rho0, p, 5.0, h).matrix();
  const Matrix4c b = evolve_oracle(rho0, p, 5.0, h / 2).matrix();
  const Matrix4c ref = evolve_oracle(rho0, p, 5.0, h / 4).matrix();
  const double ratio = max_diff(a, ref) / max_diff(b, ref);
  EXPECT_NEAR(ratio, 16.0, 4.0);
  EXPECT_LT(max_diff(evolve_oracle(rho0, p, 5.0, 1e-3).matrix(), evolve_oracle(rho0, p, 5.0, 5e-4).matrix()), 1e-10);
}
