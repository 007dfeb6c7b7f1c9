#pragma once

#include <vector>

#include <Eigen/Core>

#include "nlreg/kernel.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/robust_kpca.hpp"

namespace nlreg {

struct LabeledData {
  Eigen::MatrixXd data;    // d x N
  std::vector<int> labels; // length N

  void validate() const;
};

/// |K_est - K_gt|_F^2, divided by |K_gt|_F^2 when `normalized`.
double manifold_error(const Eigen::MatrixXd& K_est, const Eigen::MatrixXd& K_gt,
                      bool normalized = false);

/// Coordinates of points in the estimated manifold:
///   z_j(t) = (1 / spectrum_j) * sum_i basis_ij k(s_i, t)
/// for the active components j. `cross` holds k(s_i, t) with one column per point.
Eigen::MatrixXd manifold_embedding(const FeatureBasis& C, const Eigen::MatrixXd& cross);

struct Classification {
  std::vector<int> predicted;
  double error_rate = 0.0;  // fraction misclassified
};

/// 1-nearest-neighbour classification in the embedding of `C`, which must come
/// from the training kernel matrix. When `test_labels` is empty the error rate
/// is left at zero.
Classification knn_classify(const FeatureBasis& C, const LabeledData& train,
                            const Eigen::MatrixXd& test, const KernelModel& k,
                            const std::vector<int>& test_labels = {});

struct CompletionRms {
  double deleted = 0.0;  // over entries with mask_deleted = true
  double all = 0.0;      // over every entry
};

CompletionRms completion_rms(const Eigen::MatrixXd& S_est, const Eigen::MatrixXd& S_gt,
                             const MaskMatrix& mask_deleted);

/// Normalized mean 3D error over 3F x N shape sequences:
///   e3d = (1 / (sigma F N)) sum_ij |est_ij - gt_ij|,
/// sigma the mean of the per-coordinate standard deviations of the ground truth.
/// The estimate with its z coordinates negated is also scored; the smaller wins.
double e3d(const Eigen::MatrixXd& S_est, const Eigen::MatrixXd& S_gt);

}  // namespace nlreg
