#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nlreg/error.hpp"
#include "nlreg/kernel.hpp"
#include "nlreg/robust_kpca.hpp"
#include "oracles.hpp"

using namespace nlreg;

namespace {

double cubic_residual(double r, double p, double q) { return r * r * r + p * r + q; }

}  // namespace

TEST(DepressedCubic, TripleRootAtZero) {
  const auto roots = depressed_cubic_real_roots(0.0, 0.0);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0], 0.0);
}

TEST(DepressedCubic, ThreeSimpleRoots) {
  const auto roots = depressed_cubic_real_roots(-1.0, 0.0);
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[0], -1.0, 1e-14);
  EXPECT_NEAR(roots[1], 0.0, 1e-14);
  EXPECT_NEAR(roots[2], 1.0, 1e-14);
}

TEST(DepressedCubic, DoubleRootReportedOnce) {
  // (x - 1)^2 (x + 2) = x^3 - 3x + 2
  const auto roots = depressed_cubic_real_roots(-3.0, 2.0);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], -2.0, 1e-12);
  EXPECT_NEAR(roots[1], 1.0, 1e-7);
}

TEST(DepressedCubic, MatchesBisectionOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = coef(rng), q = coef(rng);
    const auto roots = depressed_cubic_real_roots(p, q);
    const auto expected = oracle::cubic_roots_bisection(p, q);
    ASSERT_EQ(roots.size(), expected.size()) << "p=" << p << " q=" << q;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      EXPECT_NEAR(roots[i], expected[i], 1e-7) << "p=" << p << " q=" << q;
      EXPECT_LE(std::abs(cubic_residual(roots[i], p, q)),
                1e-9 * std::max(1.0, std::pow(std::abs(roots[i]), 3)));
    }
  }
}

TEST(DepressedCubic, NearMergingRoots) {
  // lambda = 3, threshold tau/(2 rho) = 2 (lambda/3)^{3/2} = 2: roots merge at x = 1.
  for (double eps : {1e-3, 1e-6, 1e-9, 0.0, -1e-9, -1e-6}) {
    const double q = 2.0 + eps;
    for (double r : depressed_cubic_real_roots(-3.0, q))
      EXPECT_LE(std::abs(cubic_residual(r, -3.0, q)), 1e-9 * std::max(1.0, std::pow(std::abs(r), 3)));
  }
}

TEST(ShrinkEigenvalue, NoShrinkageWithoutTau) {
  EXPECT_NEAR(shrink_eigenvalue(1.0, {0.0, 1.0}), 1.0, 1e-15);
  EXPECT_NEAR(shrink_eigenvalue(1.0, {0.0, 37.0}), 1.0, 1e-15);
  EXPECT_NEAR(shrink_eigenvalue(7.0, {0.0, 0.5}), std::sqrt(7.0), 1e-14);
}

TEST(ShrinkEigenvalue, ZeroEigenvalueStaysZero) {
  EXPECT_EQ(shrink_eigenvalue(0.0, {0.3, 2.0}), 0.0);
  EXPECT_EQ(shrink_eigenvalue(0.0, {1e-6, 1e-2}), 0.0);
}

TEST(ShrinkEigenvalue, NegativeEigenvalueRejected) {
  EXPECT_THROW(shrink_eigenvalue(-1.0, {0.1, 1.0}), InvalidInputError);
}

TEST(ShrinkEigenvalue, GridOracleAndStationarity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lam(0.0, 10.0), ltau(std::log(1e-4), 0.0),
      lrho(std::log(1e-2), std::log(1e2));
  for (int trial = 0; trial < 200; ++trial) {
    const double lambda = lam(rng), tau = std::exp(ltau(rng)), rho = std::exp(lrho(rng));
    const ShrinkageParams params{tau, rho};
    const double g = shrink_eigenvalue(lambda, params);
    const double grid = oracle::shrinkage_grid_min(lambda, tau, rho, std::sqrt(lambda) + 1.0);
    EXPECT_LE(shrinkage_objective(lambda, g, params), grid + 1e-6);
    if (g > 0.0)
      EXPECT_LE(std::abs(g * g * g - lambda * g + tau / (2.0 * rho)),
                1e-7 * std::max(1.0, std::pow(lambda, 1.5)));
  }
}

TEST(ShrinkEigenvalue, MonotoneInTau) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lam(0.0, 10.0), lrho(std::log(1e-2), std::log(1e2));
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda = lam(rng), rho = std::exp(lrho(rng));
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const double tau = 1e-4 * std::pow(1e4, i / 19.0);
      const double g = shrink_eigenvalue(lambda, {tau, rho});
      EXPECT_LE(g, previous + 1e-12);
      previous = g;
    }
  }
}

TEST(ShrinkSpectrum, ParallelMatchesSerialExactly) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lam(0.0, 5.0);
  Eigen::VectorXd l(500);
  for (auto& v : l) v = lam(rng);
  const ShrinkageParams params{0.2, 3.0};
  EXPECT_TRUE(shrink_spectrum(l, params) == shrink_spectrum_serial(l, params));
}

TEST(RobustKpca, VanishingTauRecoversKernel) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd K = oracle::random_psd(50, rng);
  const FeatureBasis C = robust_kpca(K, {1e-12, 1.0});
  EXPECT_LE((C.gram() - K).norm(), 1e-6 * K.norm());
  EXPECT_LE((C.factor().transpose() * C.factor() - K).norm(), 1e-6 * K.norm());
}

TEST(RobustKpca, DiagonalExample) {
  Eigen::MatrixXd K = Eigen::Vector2d(4.0, 0.01).asDiagonal();
  const FeatureBasis C = robust_kpca(K, {1.0, 1.0});
  // Largest root of x^3 - 4x + 0.5 (about 1.9343); the grid oracle confirms it wins.
  EXPECT_NEAR(C.spectrum(0), oracle::cubic_roots_bisection(-4.0, 0.5).back(), 1e-9);
  EXPECT_LE(shrinkage_objective(4.0, C.spectrum(0), {1.0, 1.0}),
            oracle::shrinkage_grid_min(4.0, 1.0, 1.0, 3.0) + 1e-9);
  EXPECT_EQ(C.spectrum(1), 0.0);
  EXPECT_EQ(C.effective_rank, 1);
}

TEST(RobustKpca, ObjectiveAndSpectralIdentities) {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd K = oracle::random_psd(30, rng, 8);
  const ShrinkageParams params{0.3, 2.0};
  const FeatureBasis C = robust_kpca(K, params);
  const EigenDecomposition e = sym_eig(K);
  double objective = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    const double lambda = std::max(0.0, e.eigenvalues(i));
    EXPECT_EQ(C.spectrum(i), shrink_eigenvalue(lambda, params));
    objective += shrinkage_objective(lambda, C.spectrum(i), params);
  }
  EXPECT_NEAR(C.objective, objective, 1e-10 * std::max(1.0, objective));
  // |C|_* from the spectrum equals the trace norm of the assembled factor.
  const double assembled = Eigen::JacobiSVD<Eigen::MatrixXd>(C.factor()).singularValues().sum();
  EXPECT_NEAR(C.trace_norm(), assembled, 1e-8);
  // The value reached equals rho/2 |K - C^T C|^2 + tau |C|_*.
  const double direct = 0.5 * params.rho * (K - C.gram()).squaredNorm() + params.tau * assembled;
  EXPECT_NEAR(C.objective, direct, 1e-8 * std::max(1.0, direct));
}

TEST(RobustKpca, ClosedFormBeatsRandomFactors) {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd K = oracle::random_psd(6, rng, 3);
  const ShrinkageParams params{0.5, 1.0};
  const FeatureBasis C = robust_kpca(K, params);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd L =
        C.factor() + oracle::random_matrix(6, 6, rng, trial < 100 ? 0.05 : 0.5);
    const double value =
        0.5 * params.rho * (K - L.transpose() * L).squaredNorm() +
        params.tau * Eigen::JacobiSVD<Eigen::MatrixXd>(L).singularValues().sum();
    EXPECT_GE(value, C.objective - 1e-10);
  }
}

TEST(RobustKpca, LinearKernelIdentityAsTauVanishes) {
  std::mt19937_64 rng(14);
  const Eigen::MatrixXd S = oracle::random_matrix(4, 12, rng);
  const Eigen::MatrixXd K = kernel_matrix(S, KernelModel::linear());
  const FeatureBasis C = robust_kpca(K, {1e-12, 1.0});
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues();
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(C.spectrum(i), sv(i), 1e-8);
}

TEST(RobustKpca, RejectsIndefiniteMatrix) {
  Eigen::Matrix2d K;
  K << 1.0, 0.0, 0.0, -0.5;
  EXPECT_THROW(robust_kpca(K, {0.1, 1.0}), NumericalFailureError);
}

TEST(RobustKpca, InvalidParameters) {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(robust_kpca(K, {-1.0, 1.0}), InvalidInputError);
  EXPECT_THROW(robust_kpca(K, {0.1, 0.0}), InvalidInputError);
}

TEST(TruncatedKpca, KeepsLeadingComponents) {
  Eigen::MatrixXd K = Eigen::Vector3d(9.0, 4.0, 1.0).asDiagonal();
  const FeatureBasis C = truncated_kpca(K, 2);
  EXPECT_NEAR(C.spectrum(0), 3.0, 1e-14);
  EXPECT_NEAR(C.spectrum(1), 2.0, 1e-14);
  EXPECT_EQ(C.spectrum(2), 0.0);
}
