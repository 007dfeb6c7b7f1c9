#include "nlreg/cameras.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

Eigen::Matrix3d complete_rotation(const Projection& P) {
  Eigen::Matrix3d R;
  R.row(0) = P.row(0);
  R.row(1) = P.row(1);
  R.row(2) = P.row(0).cross(P.row(1));
  return R;
}

// Nearest 2 x 3 matrix with orthonormal rows (polar factor of B).
Projection nearest_orthonormal_rows(const Projection& B) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().leftCols<2>().transpose();
}

std::vector<Eigen::Index> observed_points(const MaskedObservations& W, Eigen::Index f) {
  std::vector<Eigen::Index> pts;
  for (Eigen::Index j = 0; j < W.values.cols(); ++j)
    if (W.mask(2 * f, j) || W.mask(2 * f + 1, j)) pts.push_back(j);
  return pts;
}

}  // namespace

Projection quaternion_to_orthographic(const Eigen::Vector4d& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw InvalidInputError("quaternion_to_orthographic: zero or non-finite quaternion");
  const Eigen::Quaterniond unit(q(0) / n, q(1) / n, q(2) / n, q(3) / n);
  return unit.toRotationMatrix().topRows<2>();
}

Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
  if (out(0) < 0.0) out = -out;
  return out;
}

Projection CameraSequence::projection(Eigen::Index frame) const {
  return quaternion_to_orthographic(quaternions.at(static_cast<std::size_t>(frame)));
}

std::vector<Projection> CameraSequence::projections() const {
  std::vector<Projection> out;
  out.reserve(quaternions.size());
  for (const auto& q : quaternions) out.push_back(quaternion_to_orthographic(q));
  return out;
}

CameraSequence CameraSequence::from_quaternions(std::vector<Eigen::Vector4d> q) {
  CameraSequence cams;
  for (auto& v : q) {
    const double n = v.norm();
    if (!(n > 0.0)) throw InvalidInputError("camera quaternion is zero");
    v /= n;
  }
  cams.warnings.assign(q.size(), false);
  cams.quaternions = std::move(q);
  return cams;
}

double rotation_angle_deg(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return 2.0 * std::acos(c) * 180.0 / std::numbers::pi;
}

Eigen::MatrixXd tile_shape(const Eigen::MatrixXd& shape, Eigen::Index frames) {
  if (shape.rows() != 3) throw ShapeMismatchError("tile_shape: shape must be 3 x N");
  return shape.replicate(frames, 1);
}

double reprojection_rms(const MaskedObservations& W, const CameraSequence& cams,
                        const Eigen::MatrixXd& shapes) {
  const Eigen::VectorXd r = nrsfm_loss(W, cams.projections(), shapes);
  if (r.size() == 0) return 0.0;
  return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

CameraSequence refine_cameras(const MaskedObservations& W, const Eigen::MatrixXd& shapes,
                              const CameraSequence& initial, const LMConfig& cfg) {
  W.validate();
  const Eigen::Index F = W.values.rows() / 2;
  if (W.values.rows() != 2 * F || shapes.rows() != 3 * F ||
      shapes.cols() != W.values.cols() || initial.size() != F)
    throw ShapeMismatchError("refine_cameras: inconsistent frame or point counts");

  CameraSequence out = initial;
  // vector<bool> packs bits, so threads record warnings in bytes first.
  std::vector<char> warned(static_cast<std::size_t>(F), 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index f = 0; f < F; ++f) {
    try {
      const auto pts = observed_points(W, f);
      if (pts.size() < 3) {
        warned[static_cast<std::size_t>(f)] = 1;
        continue;
      }
      std::vector<std::pair<int, Eigen::Index>> entries;
      for (Eigen::Index j : pts)
        for (int a = 0; a < 2; ++a)
          if (W.mask(2 * f + a, j)) entries.emplace_back(a, j);

      ResidualProblem prob;
      prob.variable_count = 4;
      prob.residual_count = static_cast<Eigen::Index>(entries.size());
      prob.residuals = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
        const Projection P = quaternion_to_orthographic(q);
        for (std::size_t k = 0; k < entries.size(); ++k) {
          const auto [a, j] = entries[k];
          r(static_cast<Eigen::Index>(k)) =
              W.values(2 * f + a, j) - P.row(a).dot(shapes.block<3, 1>(3 * f, j));
        }
      };
      prob.project = [](Eigen::VectorXd& q) {
        const double n = q.norm();
        if (n > 0.0) q /= n;
      };
      const Eigen::VectorXd q0 = initial.quaternions[static_cast<std::size_t>(f)].normalized();
      const LMResult res = lm_minimize(prob, q0, cfg);
      Eigen::Vector4d q = res.x.normalized();
      if (q(0) < 0.0) q = -q;
      out.quaternions[static_cast<std::size_t>(f)] = q;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  out.warnings.assign(warned.begin(), warned.end());
  return out;
}

RigidFactorization rigid_factorization_init(const MaskedObservations& W) {
  W.validate();
  if (W.values.rows() % 2 != 0 || W.values.rows() == 0)
    throw ShapeMismatchError("rigid factorization: observations must be 2F x N");
  const Eigen::Index F = W.values.rows() / 2, N = W.values.cols();
  for (Eigen::Index f = 0; f < F; ++f)
    if (observed_points(W, f).size() < 3)
      throw InvalidInputError("rigid factorization: every frame needs >= 3 observed points");

  // Initial fill: mean of the same coordinate of the same point across frames.
  Eigen::MatrixXd M = W.values;
  for (Eigen::Index j = 0; j < N; ++j) {
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      int count = 0;
      for (Eigen::Index f = 0; f < F; ++f)
        if (W.mask(2 * f + a, j)) {
          sum += W.values(2 * f + a, j);
          ++count;
        }
      const double fill = count ? sum / count : 0.0;
      for (Eigen::Index f = 0; f < F; ++f)
        if (!W.mask(2 * f + a, j)) M(2 * f + a, j) = fill;
    }
  }

  const bool complete = W.mask.all();
  const double scale = std::max(1.0, W.values.cwiseAbs().maxCoeff());
  Eigen::MatrixXd U3, V3;
  Eigen::Vector3d sv;
  Eigen::VectorXd t;
  int sweeps = 0;
  for (; sweeps < 2000; ) {
    ++sweeps;
    t = M.rowwise().mean();
    const Eigen::MatrixXd centered = M.colwise() - t;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues().size() < 3)
      throw DegenerateDataError("rigid factorization: fewer than 3 singular values");
    sv = svd.singularValues().head<3>();
    U3 = svd.matrixU().leftCols<3>();
    V3 = svd.matrixV().leftCols<3>();
    if (complete) break;
    const Eigen::MatrixXd recon = (U3 * sv.asDiagonal() * V3.transpose()).colwise() + t;
    double change = 0.0;
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i < 2 * F; ++i)
        if (!W.mask(i, j)) {
          change = std::max(change, std::abs(recon(i, j) - M(i, j)));
          M(i, j) = recon(i, j);
        }
    if (change <= 1e-12 * scale) break;
  }
  if (!(sv(2) > 1e-9 * sv(0)))
    throw DegenerateDataError("rigid factorization: measurement matrix has rank < 3");

  const Eigen::MatrixXd motion = U3 * sv.cwiseSqrt().asDiagonal();  // 2F x 3

  // Metric upgrade: find symmetric L = Q Q^T with orthonormal rows in motion * Q.
  auto coeffs = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    Eigen::Matrix<double, 1, 6> c;
    c << a(0) * b(0), a(0) * b(1) + a(1) * b(0), a(0) * b(2) + a(2) * b(0),
        a(1) * b(1), a(1) * b(2) + a(2) * b(1), a(2) * b(2);
    return c;
  };
  Eigen::MatrixXd G(3 * F, 6);
  Eigen::VectorXd rhs(3 * F);
  for (Eigen::Index f = 0; f < F; ++f) {
    const Eigen::Vector3d a = motion.row(2 * f).transpose();
    const Eigen::Vector3d b = motion.row(2 * f + 1).transpose();
    G.row(3 * f) = coeffs(a, a);
    G.row(3 * f + 1) = coeffs(b, b);
    G.row(3 * f + 2) = coeffs(a, b);
    rhs.segment<3>(3 * f) << 1.0, 1.0, 0.0;
  }
  const Eigen::VectorXd l = G.colPivHouseholderQr().solve(rhs);
  Eigen::Matrix3d L;
  L << l(0), l(1), l(2), l(1), l(3), l(4), l(2), l(4), l(5);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(L);
  const Eigen::Vector3d evals = eig.eigenvalues().cwiseMax(1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff());
  const Eigen::Matrix3d Q = eig.eigenvectors() * evals.cwiseSqrt().asDiagonal();

  RigidFactorization out;
  out.imputation_sweeps = sweeps;
  out.translations = t;
  std::vector<Eigen::Vector4d> quats;
  std::vector<Projection> projections;
  for (Eigen::Index f = 0; f < F; ++f) {
    const Projection B = motion.middleRows<2>(2 * f) * Q;
    const Projection P = nearest_orthonormal_rows(B);
    projections.push_back(P);
    quats.push_back(rotation_to_quaternion(complete_rotation(P)));
  }
  out.cameras = CameraSequence::from_quaternions(std::move(quats));

  // Shape by least squares against the observed (translation-removed) entries.
  out.shape.resize(3, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (Eigen::Index f = 0; f < F; ++f)
      for (int a = 0; a < 2; ++a)
        if (W.mask(2 * f + a, j)) {
          const Eigen::Vector3d row = projections[static_cast<std::size_t>(f)].row(a).transpose();
          A += row * row.transpose();
          b += row * (W.values(2 * f + a, j) - t(2 * f + a));
        }
    out.shape.col(j) = A.ldlt().solve(b);
  }
  return out;
}

}  // namespace nlreg
