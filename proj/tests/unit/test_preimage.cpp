#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nlreg/error.hpp"
#include "nlreg/kernel.hpp"
#include "nlreg/preimage.hpp"
#include "nlreg/robust_kpca.hpp"
#include "oracles.hpp"

using namespace nlreg;

namespace {

Eigen::MatrixXd jacobian_of(const ResidualProblem& p, const Eigen::VectorXd& x) {
  SparseJacobian J;
  p.jacobian(x, J);
  return Eigen::MatrixXd(J);
}

Eigen::MatrixXd fd_of(const ResidualProblem& p, const Eigen::VectorXd& x) {
  return oracle::forward_difference(
      [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r(p.residual_count);
        p.residuals(v, r);
        return r;
      },
      x);
}

double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

}  // namespace

TEST(KernelResiduals, ResidualCount) {
  EXPECT_EQ(kernel_residual_count(1), 1);
  EXPECT_EQ(kernel_residual_count(5), 15);
}

TEST(KernelResiduals, SymmetricWeightingIdentity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd S = oracle::random_matrix(3, 8, rng);
    const Eigen::MatrixXd W = oracle::random_matrix(3, 8, rng);
    const Eigen::MatrixXd T = oracle::random_psd(8, rng);
    const double rho = 0.1 + trial;
    for (const KernelModel& k : {KernelModel::rbf(0.6), KernelModel::linear()}) {
      const CompletionLoss loss(MaskedObservations::fully_observed(W));
      const ResidualProblem p = make_subproblem(loss, T, k, rho, 3);
      Eigen::VectorXd r(p.residual_count);
      p.residuals(Eigen::Map<const Eigen::VectorXd>(S.data(), S.size()), r);
      Eigen::MatrixXd K = k.family == KernelFamily::Rbf ? oracle::rbf_gram(S, 0.6)
                                                        : Eigen::MatrixXd(S.transpose() * S);
      const double expected = (W - S).squaredNorm() + 0.5 * rho * (K - T).squaredNorm();
      EXPECT_NEAR(r.squaredNorm(), expected, 1e-10 * std::max(1.0, expected));
      EXPECT_NEAR(subproblem_objective(loss, S, T, k, rho), expected, 1e-10 * std::max(1.0, expected));
    }
  }
}

TEST(KernelJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd S = oracle::random_matrix(2, 5, rng);
    const Eigen::MatrixXd T = oracle::random_psd(5, rng);
    const MaskMatrix mask = oracle::random_matrix(2, 5, rng).array() > 0.0;
    const CompletionLoss loss(MaskedObservations{oracle::random_matrix(2, 5, rng), mask});
    for (const KernelModel& k : {KernelModel::rbf(0.8), KernelModel::linear()}) {
      const ResidualProblem p = make_subproblem(loss, T, k, 3.0, 2);
      const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(S.data(), S.size());
      EXPECT_LE(relative_gap(jacobian_of(p, x), fd_of(p, x)), 1e-4);
    }
  }
}

TEST(KernelJacobian, ParallelAssemblyIsDeterministic) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd S = oracle::random_matrix(4, 60, rng);
  std::vector<Eigen::Triplet<double>> a, b;
  kernel_jacobian(S, KernelModel::rbf(0.3), 2.0, 7, a);
  kernel_jacobian(S, KernelModel::rbf(0.3), 2.0, 7, b);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].row(), b[i].row());
    EXPECT_EQ(a[i].col(), b[i].col());
    EXPECT_EQ(a[i].value(), b[i].value());
  }
}

TEST(SolveSubproblem, ZeroPenaltyFullObservationReturnsData) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd W = oracle::random_matrix(3, 7, rng);
  const CompletionLoss loss(MaskedObservations::fully_observed(W));
  const Eigen::MatrixXd S0 = oracle::random_matrix(3, 7, rng);
  const FeatureBasis C = robust_kpca(kernel_matrix(S0, KernelModel::rbf(0.5)), {0.1, 1.0});
  const SubproblemResult res = solve_subproblem_S(loss, C, S0, KernelModel::rbf(0.5), 0.0);
  EXPECT_LE((res.S - W).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveSubproblem, LinearKernelFixedPoint) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd S0 = oracle::random_matrix(3, 6, rng);
  const CompletionLoss loss(MaskedObservations::fully_observed(S0));
  const KernelModel k = KernelModel::linear();
  const FeatureBasis C = robust_kpca(kernel_matrix(S0, k), {1e-14, 1.0});
  const SubproblemResult res = solve_subproblem_S(loss, C, S0, k, 1.0);
  EXPECT_LE(res.initial_objective, 1e-20);
  EXPECT_LE((res.S - S0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SolveSubproblem, DenoisesPointTowardCircle) {
  // 24 clean points on the unit circle define C; one extra observation is pushed
  // off the circle and only weakly tied to its noisy value.
  const int n = 25;
  Eigen::MatrixXd clean(2, n);
  for (int j = 0; j < n; ++j) {
    const double a = 2.0 * M_PI * j / n;
    clean.col(j) << std::cos(a), std::sin(a);
  }
  Eigen::MatrixXd noisy = clean;
  noisy.col(0) *= 1.35;
  const KernelModel k = KernelModel::rbf(1.0);
  const FeatureBasis C = robust_kpca(kernel_matrix(clean, k), {1e-6, 1.0});

  MaskMatrix mask = MaskMatrix::Constant(2, n, true);
  const CompletionLoss loss(MaskedObservations{noisy, mask});
  LMConfig cfg;
  cfg.max_iters = 200;
  const SubproblemResult res = solve_subproblem_S(loss, C, noisy, k, 50.0, cfg);
  EXPECT_LE(res.objective, res.initial_objective);
  const double before = (noisy.col(0) - clean.col(0)).norm();
  const double after = (res.S.col(0) - clean.col(0)).norm();
  EXPECT_LT(after, before);
}

TEST(SolveSubproblem, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd W = oracle::random_matrix(3, 12, rng);
  const MaskMatrix mask = oracle::random_matrix(3, 12, rng).array() > -0.5;
  const CompletionLoss loss(MaskedObservations{W, mask});
  const KernelModel k = KernelModel::rbf(0.4);
  const Eigen::MatrixXd S0 = W + 0.1 * oracle::random_matrix(3, 12, rng);
  const FeatureBasis C = robust_kpca(kernel_matrix(S0, k), {0.5, 10.0});
  const SubproblemResult res = solve_subproblem_S(loss, C, S0, k, 10.0);
  EXPECT_LE(res.objective, res.initial_objective);
  double last = res.lm.initial_objective;
  for (const auto& it : res.lm.log)
    if (it.accepted) {
      EXPECT_LE(it.objective, last);
      last = it.objective;
    }
}

TEST(SolveSubproblem, ShapeChecks) {
  const Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2, 4);
  const CompletionLoss loss(MaskedObservations::fully_observed(W));
  const FeatureBasis C = robust_kpca(Eigen::MatrixXd::Identity(3, 3), {0.1, 1.0});
  EXPECT_THROW(solve_subproblem_S(loss, C, W, KernelModel::rbf(1.0), 1.0), ShapeMismatchError);
}
