#include "nlreg/tnh.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

constexpr int kDivergenceWindow = 10;

double largest_normal_eigenvalue(const SparseJacobian& J) {
  if (J.nonZeros() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(J.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = J.transpose() * (J * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

// svt that also reports the trace norm of its output.
Eigen::MatrixXd svt_with_norm(const Eigen::MatrixXd& M, double mu, double& norm) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd shrunk = (svd.singularValues().array() - mu).cwiseMax(0.0).matrix();
  norm = shrunk.sum();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double mu) {
  if (!(mu >= 0.0)) throw InvalidInputError("svt: mu must be >= 0");
  if (!M.allFinite()) throw InvalidInputError("svt: matrix is not finite");
  if (M.size() == 0 || mu == 0.0) return M;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd shrunk = (svd.singularValues().array() - mu).cwiseMax(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

double trace_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues().sum();
}

double tnh_objective(const Loss& loss, const Eigen::MatrixXd& X, double tau) {
  return tau * trace_norm(X) + loss.value(X);
}

TnhResult tnh_minimize(const Loss& loss, const Eigen::MatrixXd& X0, double tau,
                       const TnhOptions& opts) {
  if (!(tau > 0.0)) throw InvalidInputError("tnh: tau must be > 0");
  if (X0.rows() != loss.variable_rows() || X0.cols() != loss.variable_cols())
    throw ShapeMismatchError("tnh: initial estimate has the wrong shape");
  if (!X0.allFinite()) throw InvalidInputError("tnh: initial estimate is not finite");

  // The built-in losses are affine in X, so J^T J is fixed.
  std::vector<Eigen::Triplet<double>> trips;
  loss.jacobian(X0, 0, trips);
  SparseJacobian J(loss.residual_count(), X0.size());
  J.setFromTriplets(trips.begin(), trips.end());
  double L = 2.0 * largest_normal_eigenvalue(J) * 1.01;
  if (!(L > 0.0)) L = 1.0;

  TnhResult out;
  out.lipschitz = L;
  Eigen::MatrixXd x = X0;
  Eigen::MatrixXd y = X0;
  double fx = tnh_objective(loss, x, tau);
  double t = 1.0;
  int rejected_run = 0;

  for (int it = 0; it < opts.max_iters; ++it) {
    double z_norm = 0.0;
    const Eigen::MatrixXd z = svt_with_norm(y - loss.gradient(y) / L, tau / L, z_norm);
    const double fz = tau * z_norm + loss.value(z);
    const double step = (z - y).norm();
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    if (fz <= fx) {
      const Eigen::MatrixXd x_prev = x;
      x = z;
      fx = fz;
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      rejected_run = 0;
      t = t_next;
    } else {
      const bool restarted = t == 1.0;
      if (restarted && fz - fx <= 1e-12 * std::max(1.0, std::abs(fx))) {
        // A plain prox-gradient step from x no longer improves beyond rounding.
        out.objective_trace.push_back(fx);
        out.iterations = it + 1;
        out.converged = true;
        break;
      }
      // Momentum overshot: keep x and restart from it.
      y = x;
      t = 1.0;
      if (++rejected_run >= kDivergenceWindow)
        throw NumericalFailureError("tnh: objective increased for " +
                                    std::to_string(kDivergenceWindow) +
                                    " consecutive iterations");
    }
    out.objective_trace.push_back(fx);
    out.iterations = it + 1;
    if (step <= opts.tol * std::max(1.0, y.norm()) && rejected_run == 0) {
      out.converged = true;
      break;
    }
  }
  out.X = std::move(x);
  return out;
}

Eigen::MatrixXd mean_impute(const MaskedObservations& W) {
  W.validate();
  Eigen::MatrixXd out = W.values;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (W.mask(i, j)) {
        sum += W.values(i, j);
        ++count;
      }
    const double fill = count ? sum / static_cast<double>(count) : 0.0;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (!W.mask(i, j)) out(i, j) = fill;
  }
  return out;
}

Eigen::MatrixXd backproject(const MaskedObservations& W, const CameraSequence& cams) {
  W.validate();
  const Eigen::Index F = W.values.rows() / 2, N = W.values.cols();
  if (cams.size() != F) throw ShapeMismatchError("backproject: one camera per frame required");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3 * F, N);
  for (Eigen::Index f = 0; f < F; ++f) {
    const Projection P = cams.projection(f);
    for (Eigen::Index j = 0; j < N; ++j)
      for (int a = 0; a < 2; ++a)
        if (W.mask(2 * f + a, j))
          S.block<3, 1>(3 * f, j) += P.row(a).transpose() * W.values(2 * f + a, j);
  }
  return S;
}

TnhResult tnh_solve(const MaskedObservations& W, const std::optional<CameraSequence>& cams,
                    double tau, const TnhOptions& opts) {
  if (!cams) {
    const CompletionLoss loss(W);
    return tnh_minimize(loss, mean_impute(W), tau, opts);
  }
  const NrsfmLoss loss(W, cams->projections());
  TnhResult res = tnh_minimize(loss, frames_to_samples(backproject(W, *cams)), tau, opts);
  res.X = samples_to_frames(res.X);
  return res;
}

}  // namespace nlreg
