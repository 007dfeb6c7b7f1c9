#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nlreg/error.hpp"
#include "nlreg/lm.hpp"
#include "oracles.hpp"

using namespace nlreg;

namespace {

ResidualProblem linear_problem(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               bool analytic) {
  ResidualProblem p;
  p.variable_count = A.cols();
  p.residual_count = A.rows();
  p.residuals = [A, b](const Eigen::VectorXd& x, Eigen::VectorXd& r) { r = A * x - b; };
  if (analytic)
    p.jacobian = [A](const Eigen::VectorXd&, SparseJacobian& J) { J = A.sparseView(); };
  return p;
}

ResidualProblem rosenbrock() {
  ResidualProblem p;
  p.variable_count = 2;
  p.residual_count = 2;
  p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r(0) = 10.0 * (x(1) - x(0) * x(0));
    r(1) = 1.0 - x(0);
  };
  p.jacobian = [](const Eigen::VectorXd& x, SparseJacobian& J) {
    Eigen::Matrix2d D;
    D << -20.0 * x(0), 10.0, -1.0, 0.0;
    J = D.sparseView(0.0, 0.0);
  };
  return p;
}

bool accepted_objectives_nonincreasing(const LMResult& res) {
  double last = res.initial_objective;
  for (const auto& it : res.log) {
    if (it.objective > last) return false;
    if (it.accepted) last = it.objective;
  }
  return true;
}

}  // namespace

TEST(LevenbergMarquardt, LinearLeastSquares) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd A = oracle::random_matrix(12, 4, rng);
  const Eigen::VectorXd b = oracle::random_matrix(12, 1, rng);
  const Eigen::VectorXd expected = A.colPivHouseholderQr().solve(b);
  for (bool analytic : {true, false}) {
    const LMResult res = lm_minimize(linear_problem(A, b, analytic), Eigen::VectorXd::Zero(4));
    EXPECT_LE((res.x - expected).norm(), 1e-8 * std::max(1.0, expected.norm()));
    EXPECT_TRUE(accepted_objectives_nonincreasing(res));
  }
}

TEST(LevenbergMarquardt, Rosenbrock) {
  const LMResult res = lm_minimize(rosenbrock(), Eigen::Vector2d(-1.2, 1.0));
  EXPECT_LT(res.objective, 1e-12);
  EXPECT_NEAR(res.x(0), 1.0, 1e-6);
  EXPECT_NEAR(res.x(1), 1.0, 1e-6);
  EXPECT_TRUE(accepted_objectives_nonincreasing(res));
}

TEST(LevenbergMarquardt, RosenbrockByFiniteDifferences) {
  ResidualProblem p = rosenbrock();
  p.jacobian = nullptr;
  const LMResult res = lm_minimize(p, Eigen::Vector2d(-1.2, 1.0));
  EXPECT_LT(res.objective, 1e-12);
}

TEST(LevenbergMarquardt, ZeroResidualStart) {
  const LMResult res = lm_minimize(rosenbrock(), Eigen::Vector2d(1.0, 1.0));
  EXPECT_LE(res.iterations, 1);
  EXPECT_EQ(res.x, Eigen::Vector2d(1.0, 1.0));
  EXPECT_EQ(res.stop, LMStop::ZeroResidual);
}

TEST(LevenbergMarquardt, ConjugateGradientPathAgreesWithDense) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd A = oracle::random_matrix(40, 10, rng);
  const Eigen::VectorXd b = oracle::random_matrix(40, 1, rng);
  LMConfig cfg;
  cfg.dense_limit = 5;
  const LMResult res = lm_minimize(linear_problem(A, b, true), Eigen::VectorXd::Zero(10), cfg);
  const Eigen::VectorXd expected = A.colPivHouseholderQr().solve(b);
  EXPECT_LE((res.x - expected).norm(), 1e-7 * expected.norm());
}

TEST(LevenbergMarquardt, NonFiniteStartRejected) {
  ResidualProblem p = rosenbrock();
  EXPECT_THROW(lm_minimize(p, Eigen::Vector2d(std::nan(""), 0.0)), InvalidInputError);
  p.residuals = [](const Eigen::VectorXd&, Eigen::VectorXd& r) { r.setConstant(INFINITY); };
  EXPECT_THROW(lm_minimize(p, Eigen::Vector2d(0.0, 0.0)), InvalidInputError);
}

TEST(LevenbergMarquardt, NonFiniteTrialsCountAsRejections) {
  // log residual is undefined for x <= 0; the minimizer x = 1 lies inside the domain.
  ResidualProblem p;
  p.variable_count = 1;
  p.residual_count = 1;
  p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r(0) = x(0) > 0.0 ? std::log(x(0)) * 10.0 : std::nan("");
  };
  p.jacobian = [](const Eigen::VectorXd& x, SparseJacobian& J) {
    Eigen::MatrixXd D(1, 1);
    D(0, 0) = 10.0 / x(0);
    J = D.sparseView();
  };
  LMConfig cfg;
  cfg.initial_damping = 1e-12;
  const LMResult res = lm_minimize(p, Eigen::VectorXd::Constant(1, 20.0), cfg);
  EXPECT_NEAR(res.x(0), 1.0, 1e-6);
  EXPECT_TRUE(accepted_objectives_nonincreasing(res));
}

TEST(LevenbergMarquardt, ProjectionKeepsIterateOnSphere) {
  // Closest unit vector to (3, 4): minimize |x - (3,4)|^2 with renormalization.
  ResidualProblem p;
  p.variable_count = 2;
  p.residual_count = 2;
  p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) { r = x - Eigen::Vector2d(3, 4); };
  p.project = [](Eigen::VectorXd& x) { x.normalize(); };
  const LMResult res = lm_minimize(p, Eigen::Vector2d(1.0, 0.0));
  EXPECT_NEAR(res.x.norm(), 1.0, 1e-12);
  EXPECT_NEAR(res.x(0), 0.6, 1e-5);
  EXPECT_NEAR(res.x(1), 0.8, 1e-5);
}

TEST(LevenbergMarquardt, FiniteDifferenceStep) {
  ResidualProblem p;
  p.variable_count = 1;
  p.residual_count = 1;
  p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) { r(0) = x(0) * x(0); };
  const SparseJacobian J = finite_difference_jacobian(p, Eigen::VectorXd::Constant(1, 3.0));
  const double h = 1e-6 * 4.0;
  EXPECT_NEAR(J.coeff(0, 0), ((3.0 + h) * (3.0 + h) - 9.0) / h, 1e-9);
}

TEST(LMConfig, RejectsNonPositiveSettings) {
  LMConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
}
