#include "nlreg/loss.hpp"

#include "nlreg/error.hpp"

namespace nlreg {

MaskedObservations MaskedObservations::fully_observed(const Eigen::MatrixXd& W) {
  return {W, MaskMatrix::Constant(W.rows(), W.cols(), true)};
}

void MaskedObservations::validate() const {
  if (values.rows() != mask.rows() || values.cols() != mask.cols())
    throw ShapeMismatchError("observation values and mask differ in shape");
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (mask(i, j) && !std::isfinite(values(i, j)))
        throw InvalidInputError("observed entry is not finite");
}

double Loss::value(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd r(residual_count());
  residuals(X, r);
  return r.squaredNorm();
}

Eigen::MatrixXd Loss::gradient(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd r(residual_count());
  residuals(X, r);
  std::vector<Eigen::Triplet<double>> trips;
  jacobian(X, 0, trips);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  for (const auto& t : trips) grad(t.col()) += 2.0 * t.value() * r(t.row());
  return grad;
}

CompletionLoss::CompletionLoss(MaskedObservations obs) : obs_(std::move(obs)) {
  obs_.validate();
  count_ = obs_.observed_count();
}

void CompletionLoss::residuals(const Eigen::MatrixXd& X,
                               Eigen::Ref<Eigen::VectorXd> r) const {
  if (X.rows() != obs_.values.rows() || X.cols() != obs_.values.cols())
    throw ShapeMismatchError("completion loss: variable shape mismatch");
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (obs_.mask(i, j)) r(k++) = obs_.values(i, j) - X(i, j);
}

void CompletionLoss::jacobian(const Eigen::MatrixXd& X, Eigen::Index row_offset,
                              std::vector<Eigen::Triplet<double>>& out) const {
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      if (obs_.mask(i, j)) out.emplace_back(row_offset + k++, j * X.rows() + i, -1.0);
}

NrsfmLoss::NrsfmLoss(MaskedObservations obs, std::vector<Projection> cameras)
    : obs_(std::move(obs)), cameras_(std::move(cameras)) {
  obs_.validate();
  if (obs_.values.rows() % 2 != 0)
    throw ShapeMismatchError("NRSfM observations must have 2F rows");
  frames_ = obs_.values.rows() / 2;
  points_ = obs_.values.cols();
  if (static_cast<Eigen::Index>(cameras_.size()) != frames_)
    throw ShapeMismatchError("NRSfM loss: one camera per frame required");
  count_ = obs_.observed_count();
}

void NrsfmLoss::residuals(const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> r) const {
  if (X.rows() != 3 * points_ || X.cols() != frames_)
    throw ShapeMismatchError("NRSfM loss: variable must be 3N x F");
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < points_; ++j)
    for (Eigen::Index f = 0; f < frames_; ++f)
      for (int a = 0; a < 2; ++a)
        if (obs_.mask(2 * f + a, j))
          r(k++) = obs_.values(2 * f + a, j) -
                   cameras_[f].row(a).dot(X.col(f).segment<3>(3 * j));
}

void NrsfmLoss::jacobian(const Eigen::MatrixXd& X, Eigen::Index row_offset,
                         std::vector<Eigen::Triplet<double>>& out) const {
  (void)X;
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < points_; ++j)
    for (Eigen::Index f = 0; f < frames_; ++f)
      for (int a = 0; a < 2; ++a)
        if (obs_.mask(2 * f + a, j)) {
          const Eigen::Index col0 = f * 3 * points_ + 3 * j;
          for (int c = 0; c < 3; ++c)
            out.emplace_back(row_offset + k, col0 + c, -cameras_[f](a, c));
          ++k;
        }
}

Eigen::MatrixXd frames_to_samples(const Eigen::MatrixXd& shapes) {
  if (shapes.rows() % 3 != 0)
    throw ShapeMismatchError("shape sequence must have 3F rows");
  const Eigen::Index F = shapes.rows() / 3, N = shapes.cols();
  Eigen::MatrixXd X(3 * N, F);
  for (Eigen::Index f = 0; f < F; ++f)
    for (Eigen::Index j = 0; j < N; ++j) X.col(f).segment<3>(3 * j) = shapes.block<3, 1>(3 * f, j);
  return X;
}

Eigen::MatrixXd samples_to_frames(const Eigen::MatrixXd& samples) {
  if (samples.rows() % 3 != 0)
    throw ShapeMismatchError("frame samples must have 3N rows");
  const Eigen::Index N = samples.rows() / 3, F = samples.cols();
  Eigen::MatrixXd S(3 * F, N);
  for (Eigen::Index f = 0; f < F; ++f)
    for (Eigen::Index j = 0; j < N; ++j) S.block<3, 1>(3 * f, j) = samples.col(f).segment<3>(3 * j);
  return S;
}

Eigen::VectorXd completion_loss(const MaskedObservations& W, const Eigen::MatrixXd& S) {
  CompletionLoss loss(W);
  Eigen::VectorXd r(loss.residual_count());
  loss.residuals(S, r);
  return r;
}

Eigen::VectorXd nrsfm_loss(const MaskedObservations& W,
                           const std::vector<Projection>& cameras,
                           const Eigen::MatrixXd& S) {
  NrsfmLoss loss(W, cameras);
  Eigen::VectorXd r(loss.residual_count());
  loss.residuals(frames_to_samples(S), r);
  return r;
}

}  // namespace nlreg
