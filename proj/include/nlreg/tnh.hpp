#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nlreg/cameras.hpp"
#include "nlreg/loss.hpp"

namespace nlreg {

/// Singular value soft-thresholding: U max(Sigma - mu, 0) V^T.
Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double mu);

/// Trace norm (sum of singular values).
double trace_norm(const Eigen::MatrixXd& M);

struct TnhOptions {
  int max_iters = 20000;
  /// Stop once the prox-gradient step |z - y|_F falls below tol * max(1, |y|_F).
  double tol = 1e-10;
};

struct TnhResult {
  Eigen::MatrixXd X;                    // minimizer in the loss's variable layout
  std::vector<double> objective_trace;  // one entry per iteration, nonincreasing
  int iterations = 0;
  double lipschitz = 0.0;
  bool converged = false;
};

/// tau |X|_* + f(X) for the given loss.
double tnh_objective(const Loss& loss, const Eigen::MatrixXd& X, double tau);

/// Trace-norm heuristic by accelerated proximal gradient with function-value
/// restart: forward step on the smooth loss with step 1/L (L from power iteration
/// on J^T J), backward step svt. A step that would raise the objective is rejected
/// and momentum restarts, so the trace is nonincreasing; ten consecutive
/// rejections raise NumericalFailureError.
TnhResult tnh_minimize(const Loss& loss, const Eigen::MatrixXd& X0, double tau,
                       const TnhOptions& opts = {});

/// Row-wise mean of the observed entries in each row of W, for unobserved cells.
Eigen::MatrixXd mean_impute(const MaskedObservations& W);

/// Zero-depth lift of 2F x N observations into a 3F x N shape sequence
/// (R_i^T w per observed point, zero elsewhere).
Eigen::MatrixXd backproject(const MaskedObservations& W, const CameraSequence& cams);

/// Baseline: with cameras, minimizes tau |X|_* + reprojection error over the
/// 3N x F frame-sample matrix X and returns the 3F x N shape sequence in
/// result.X; without cameras, plain masked completion of W (initialized by
/// mean_impute) with result.X in W's layout.
TnhResult tnh_solve(const MaskedObservations& W, const std::optional<CameraSequence>& cams,
                    double tau, const TnhOptions& opts = {});

}  // namespace nlreg
