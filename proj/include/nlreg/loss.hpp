#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace nlreg {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Observation matrix W with availability mask Z (true = observed). Entries of
/// W under a false mask are never read.
struct MaskedObservations {
  Eigen::MatrixXd values;
  MaskMatrix mask;

  static MaskedObservations fully_observed(const Eigen::MatrixXd& W);
  Eigen::Index observed_count() const { return mask.count(); }
  void validate() const;
};

using Projection = Eigen::Matrix<double, 2, 3>;

/// Data term f(W, X) as a stack of residuals over a variable matrix X whose
/// columns are the kernel samples. The loss value is the sum of squares.
class Loss {
 public:
  virtual ~Loss() = default;

  virtual Eigen::Index variable_rows() const = 0;
  virtual Eigen::Index variable_cols() const = 0;
  virtual Eigen::Index residual_count() const = 0;

  virtual void residuals(const Eigen::MatrixXd& X,
                         Eigen::Ref<Eigen::VectorXd> r) const = 0;
  /// Jacobian d r / d vec(X) (column-major vec) appended as triplets whose row
  /// indices are shifted by row_offset.
  virtual void jacobian(const Eigen::MatrixXd& X, Eigen::Index row_offset,
                        std::vector<Eigen::Triplet<double>>& out) const = 0;

  double value(const Eigen::MatrixXd& X) const;
  /// Gradient of value() with respect to X.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& X) const;
};

/// |Z o (W - X)|_F^2: residual W_ij - X_ij per observed entry, column-major order.
class CompletionLoss final : public Loss {
 public:
  explicit CompletionLoss(MaskedObservations obs);

  Eigen::Index variable_rows() const override { return obs_.values.rows(); }
  Eigen::Index variable_cols() const override { return obs_.values.cols(); }
  Eigen::Index residual_count() const override { return count_; }
  void residuals(const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> r) const override;
  void jacobian(const Eigen::MatrixXd& X, Eigen::Index row_offset,
                std::vector<Eigen::Triplet<double>>& out) const override;

  const MaskedObservations& observations() const { return obs_; }

 private:
  MaskedObservations obs_;
  Eigen::Index count_;
};

/// Orthographic reprojection error sum_ij Z_i(x_j) |w_i(x_j) - R_i s_i(x_j)|^2.
/// Observations are 2F x N (rows 2i, 2i+1 belong to frame i); the variable is the
/// 3N x F frame-sample matrix, column i stacking frame i's points as x, y, z.
/// Each observed scalar entry contributes one residual.
class NrsfmLoss final : public Loss {
 public:
  NrsfmLoss(MaskedObservations obs, std::vector<Projection> cameras);

  Eigen::Index variable_rows() const override { return 3 * points_; }
  Eigen::Index variable_cols() const override { return frames_; }
  Eigen::Index residual_count() const override { return count_; }
  void residuals(const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> r) const override;
  void jacobian(const Eigen::MatrixXd& X, Eigen::Index row_offset,
                std::vector<Eigen::Triplet<double>>& out) const override;

  const MaskedObservations& observations() const { return obs_; }
  const std::vector<Projection>& cameras() const { return cameras_; }

 private:
  MaskedObservations obs_;
  std::vector<Projection> cameras_;
  Eigen::Index frames_, points_, count_;
};

/// Shape layout conversions. A shape sequence is 3F x N: rows 3i..3i+2 hold the
/// x, y, z coordinates of frame i, column j is point j. The frame-sample layout is
/// 3N x F: column i is frame i's shape vector (x0 y0 z0 x1 y1 z1 ...).
Eigen::MatrixXd frames_to_samples(const Eigen::MatrixXd& shapes);
Eigen::MatrixXd samples_to_frames(const Eigen::MatrixXd& samples);

/// Residual block (W_ij - S_ij) for the observed entries of W.
Eigen::VectorXd completion_loss(const MaskedObservations& W, const Eigen::MatrixXd& S);

/// Residual block w_i(x_j) - R_i s_i(x_j) for observed entries; S is the 3F x N
/// shape sequence.
Eigen::VectorXd nrsfm_loss(const MaskedObservations& W,
                           const std::vector<Projection>& cameras,
                           const Eigen::MatrixXd& S);

}  // namespace nlreg
