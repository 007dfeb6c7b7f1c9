#include "nlreg/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix<double, ManifoldFamily::kFeatureCount, 1> surface_features(
    int cls, const Eigen::Vector3d& u) {
  const double phase = 0.7 * cls;
  Eigen::Matrix<double, ManifoldFamily::kFeatureCount, 1> f;
  f << u(0), u(1), u(2),
      std::sin(kPi * u(0) + phase),
      std::cos(kPi * u(1) + phase),
      std::sin(kPi * (u(0) + u(2))),
      u(0) * u(1),
      std::cos(kPi * u(2)) * u(0),
      u(1) * u(2);
  return f;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

ManifoldFamily::ManifoldFamily(int classes, int dim, std::uint64_t seed) : dim_(dim) {
  if (classes < 1 || dim < 1) throw InvalidInputError("manifold family needs classes, dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(kFeatureCount));
  for (int c = 0; c < classes; ++c) {
    Eigen::MatrixXd A(dim, kFeatureCount);
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, j) = map_scale * normal(rng);
    Eigen::VectorXd b(dim);
    for (Eigen::Index i = 0; i < dim; ++i) b(i) = normal(rng);
    maps_.push_back(std::move(A));
    offsets_.push_back(std::move(b));
  }
}

Eigen::VectorXd ManifoldFamily::point(int cls, const Eigen::Vector3d& u) const {
  if (cls < 0 || cls >= classes()) throw InvalidInputError("manifold family: bad class id");
  return offsets_[static_cast<std::size_t>(cls)] +
         maps_[static_cast<std::size_t>(cls)] * surface_features(cls, u);
}

ManifoldSample synth_manifold(int n_per_class, int dim, double noise_sigma,
                              std::uint64_t seed, int classes) {
  if (n_per_class < 1) throw InvalidInputError("synth_manifold: n_per_class must be >= 1");
  if (!(noise_sigma >= 0.0)) throw InvalidInputError("synth_manifold: noise must be >= 0");
  const ManifoldFamily family(classes, dim, seed);
  // Separate stream for sampling so surfaces depend only on (classes, dim, seed).
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::Index n = static_cast<Eigen::Index>(n_per_class) * classes;
  ManifoldSample out;
  out.clean.resize(dim, n);
  out.latent.resize(3, n);
  out.noisy.labels.resize(static_cast<std::size_t>(n));
  Eigen::Index col = 0;
  for (int c = 0; c < classes; ++c)
    for (int s = 0; s < n_per_class; ++s, ++col) {
      const Eigen::Vector3d u(uniform(rng), uniform(rng), uniform(rng));
      out.latent.col(col) = u;
      out.clean.col(col) = family.point(c, u);
      out.noisy.labels[static_cast<std::size_t>(col)] = c;
    }
  out.noisy.data = out.clean;
  if (noise_sigma > 0.0)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) out.noisy.data(i, j) += noise_sigma * normal(rng);
  return out;
}

NrsfmInstance synth_nrsfm(int frames, int points, double deformation_amplitude,
                          double missing_prob, double noise, std::uint64_t seed) {
  if (frames < 1 || points < 4) throw InvalidInputError("synth_nrsfm: need F >= 1 and N >= 4");
  if (!(missing_prob >= 0.0 && missing_prob < 1.0) || !(noise >= 0.0))
    throw InvalidInputError("synth_nrsfm: missing_prob in [0, 1) and noise >= 0 required");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Rest pose: segment A along -x, segment B along +x, both with some girth.
  const int n_a = points / 2;
  Eigen::Matrix3Xd rest(3, points);
  for (int j = 0; j < points; ++j) {
    const bool in_b = j >= n_a;
    const double along = (in_b ? 1.0 : -1.0) * (0.15 + 0.85 * uniform(rng));
    rest.col(j) << along, 0.25 * normal(rng), 0.25 * normal(rng);
  }
  const Eigen::Vector3d hinge = Eigen::Vector3d(0.3, 0.5, 1.0).normalized();
  const double phase0 = 2.0 * kPi * uniform(rng);

  NrsfmInstance out;
  out.shapes.resize(3 * frames, points);
  std::vector<Eigen::Vector4d> quats;
  Eigen::Matrix3d cam = axis_angle(Eigen::Vector3d(normal(rng), normal(rng), normal(rng)),
                                   2.0 * kPi * uniform(rng));
  Eigen::Vector3d axis = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized();
  for (int f = 0; f < frames; ++f) {
    const double angle =
        deformation_amplitude * std::sin(phase0 + 3.0 * kPi * f / std::max(1, frames - 1));
    const Eigen::Matrix3d swing = axis_angle(hinge, angle);
    Eigen::Matrix3Xd shape = rest;
    for (int j = n_a; j < points; ++j) shape.col(j) = swing * rest.col(j);
    const Eigen::Vector3d centroid = shape.rowwise().mean();
    shape.colwise() -= centroid;
    out.shapes.middleRows<3>(3 * f) = shape;

    if (f > 0) {
      // The axis drifts rather than being redrawn, so the views accumulate a
      // wide range of directions instead of jittering around the first one.
      axis = (axis + 0.3 * Eigen::Vector3d(normal(rng), normal(rng), normal(rng))).normalized();
      cam = cam * axis_angle(axis, 0.1 + 0.1 * uniform(rng));
    }
    quats.push_back(rotation_to_quaternion(cam));
  }
  out.cameras = CameraSequence::from_quaternions(std::move(quats));

  out.W.values.resize(2 * frames, points);
  out.W.mask = MaskMatrix::Constant(2 * frames, points, true);
  for (int f = 0; f < frames; ++f) {
    const Projection P = out.cameras.projection(f);
    for (int j = 0; j < points; ++j) {
      const bool hidden = missing_prob > 0.0 && uniform(rng) < missing_prob;
      Eigen::Vector2d w = P * out.shapes.block<3, 1>(3 * f, j);
      if (noise > 0.0) w += noise * Eigen::Vector2d(normal(rng), normal(rng));
      out.W.values.block<2, 1>(2 * f, j) = w;
      out.W.mask(2 * f, j) = !hidden;
      out.W.mask(2 * f + 1, j) = !hidden;
    }
  }
  return out;
}

MaskMatrix random_deletion_mask(Eigen::Index rows, Eigen::Index cols, double p,
                                std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("deletion probability must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  MaskMatrix mask(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = uniform(rng) < p;
  return mask;
}

}  // namespace nlreg
