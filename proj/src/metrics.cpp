#include "nlreg/metrics.hpp"

#include <cmath>
#include <limits>

#include "nlreg/error.hpp"

namespace nlreg {

void LabeledData::validate() const {
  check_data_matrix(data);
  if (static_cast<Eigen::Index>(labels.size()) != data.cols())
    throw ShapeMismatchError("label count does not match the number of samples");
}

double manifold_error(const Eigen::MatrixXd& K_est, const Eigen::MatrixXd& K_gt,
                      bool normalized) {
  if (K_est.rows() != K_gt.rows() || K_est.cols() != K_gt.cols())
    throw ShapeMismatchError("manifold_error: kernel matrices differ in shape");
  const double err = (K_est - K_gt).squaredNorm();
  if (!normalized) return err;
  const double ref = K_gt.squaredNorm();
  if (!(ref > 0.0)) throw UndefinedMetricError("manifold_error: reference kernel is zero");
  return err / ref;
}

Eigen::MatrixXd manifold_embedding(const FeatureBasis& C, const Eigen::MatrixXd& cross) {
  const auto active = C.active_components();
  if (active.empty())
    throw DegenerateDataError("every manifold component was shrunk to zero");
  if (cross.rows() != C.basis.rows())
    throw ShapeMismatchError("manifold_embedding: cross kernel has the wrong row count");
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(active.size()), cross.cols());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const Eigen::Index j = active[a];
    Z.row(static_cast<Eigen::Index>(a)) =
        (C.basis.col(j).transpose() * cross) / C.spectrum(j);
  }
  return Z;
}

Classification knn_classify(const FeatureBasis& C, const LabeledData& train,
                            const Eigen::MatrixXd& test, const KernelModel& k,
                            const std::vector<int>& test_labels) {
  train.validate();
  check_data_matrix(test);
  if (!test_labels.empty() && static_cast<Eigen::Index>(test_labels.size()) != test.cols())
    throw ShapeMismatchError("knn_classify: test label count mismatch");
  if (C.basis.rows() != train.data.cols())
    throw ShapeMismatchError("knn_classify: feature basis was not built from the training set");

  const Eigen::MatrixXd Ztrain = manifold_embedding(C, kernel_matrix(train.data, k));
  const Eigen::MatrixXd Ztest = manifold_embedding(C, cross_kernel(train.data, test, k));

  Classification out;
  out.predicted.resize(static_cast<std::size_t>(test.cols()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < test.cols(); ++t) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < Ztrain.cols(); ++i) {
      const double d = (Ztrain.col(i) - Ztest.col(t)).squaredNorm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    out.predicted[static_cast<std::size_t>(t)] = train.labels[static_cast<std::size_t>(arg)];
  }
  if (!test_labels.empty()) {
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < test_labels.size(); ++t)
      wrong += out.predicted[t] != test_labels[t];
    out.error_rate = static_cast<double>(wrong) / static_cast<double>(test_labels.size());
  }
  return out;
}

CompletionRms completion_rms(const Eigen::MatrixXd& S_est, const Eigen::MatrixXd& S_gt,
                             const MaskMatrix& mask_deleted) {
  if (S_est.rows() != S_gt.rows() || S_est.cols() != S_gt.cols() ||
      mask_deleted.rows() != S_gt.rows() || mask_deleted.cols() != S_gt.cols())
    throw ShapeMismatchError("completion_rms: shapes differ");
  const Eigen::Index deleted = mask_deleted.count();
  if (deleted == 0) throw UndefinedMetricError("completion_rms: no deleted entries");
  const Eigen::ArrayXXd sq = (S_est - S_gt).array().square();
  CompletionRms out;
  out.deleted = std::sqrt(mask_deleted.select(sq, 0.0).sum() / static_cast<double>(deleted));
  out.all = std::sqrt(sq.mean());
  return out;
}

double e3d(const Eigen::MatrixXd& S_est, const Eigen::MatrixXd& S_gt) {
  if (S_est.rows() != S_gt.rows() || S_est.cols() != S_gt.cols() || S_gt.rows() % 3 != 0)
    throw ShapeMismatchError("e3d: shape sequences must both be 3F x N");
  const Eigen::Index F = S_gt.rows() / 3, N = S_gt.cols();

  double sigma = 0.0;
  for (int c = 0; c < 3; ++c) {
    Eigen::ArrayXd coord(F * N);
    for (Eigen::Index f = 0; f < F; ++f) coord.segment(f * N, N) = S_gt.row(3 * f + c).array();
    const double mean = coord.mean();
    sigma += std::sqrt((coord - mean).square().mean()) / 3.0;
  }
  if (!(sigma > 0.0)) throw UndefinedMetricError("e3d: ground truth has zero spread");

  auto score = [&](double z_sign) {
    double total = 0.0;
    for (Eigen::Index f = 0; f < F; ++f)
      for (Eigen::Index j = 0; j < N; ++j) {
        Eigen::Vector3d est = S_est.block<3, 1>(3 * f, j);
        est(2) *= z_sign;
        total += (est - S_gt.block<3, 1>(3 * f, j)).norm();
      }
    return total / (sigma * static_cast<double>(F * N));
  };
  return std::min(score(1.0), score(-1.0));
}

}  // namespace nlreg
