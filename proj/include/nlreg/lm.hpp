#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace nlreg {

using SparseJacobian = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Nonlinear least squares: minimize 1/2 |r(x)|^2.
struct ResidualProblem {
  Eigen::Index variable_count = 0;
  Eigen::Index residual_count = 0;
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residuals;
  /// Optional; forward differences with step 1e-6 (1 + |x_i|) when empty.
  std::function<void(const Eigen::VectorXd& x, SparseJacobian& J)> jacobian;
  /// Optional retraction applied to every trial point (e.g. renormalization).
  std::function<void(Eigen::VectorXd& x)> project;
  /// Unknowns come in consecutive groups of this size; the iterative solver
  /// preconditions with the matching diagonal blocks of J^T J.
  Eigen::Index block_size = 1;
};

struct LMConfig {
  int max_iters = 100;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double step_tolerance = 1e-9;
  double objective_tolerance = 1e-8;
  /// Normal equations with more unknowns than this are solved by block-Jacobi
  /// preconditioned conjugate gradients instead of a dense factorization.
  Eigen::Index dense_limit = 2000;
  /// Relative residual at which conjugate gradients stops.
  double cg_tolerance = 1e-6;

  void validate() const;
};

struct LMIteration {
  int iteration = 0;
  double objective = 0.0;  // after the iteration
  double damping = 0.0;
  bool accepted = false;
};

enum class LMStop { ZeroResidual, SmallGradient, StepTolerance, ObjectiveTolerance,
                    MaxIterations, DampingOverflow };

struct LMResult {
  Eigen::VectorXd x;
  double initial_objective = 0.0;
  double objective = 0.0;
  int iterations = 0;
  LMStop stop = LMStop::MaxIterations;
  std::vector<LMIteration> log;
};

/// Forward-difference Jacobian, dense and converted to sparse storage.
SparseJacobian finite_difference_jacobian(const ResidualProblem& prob,
                                          const Eigen::VectorXd& x);

/// Damped Gauss-Newton with Marquardt diagonal scaling. Accepted steps never
/// increase the objective; the best iterate is returned. A non-finite residual
/// at x0 throws InvalidInputError; non-finite trial points count as rejections.
LMResult lm_minimize(const ResidualProblem& prob, const Eigen::VectorXd& x0,
                     const LMConfig& cfg = {});

}  // namespace nlreg
