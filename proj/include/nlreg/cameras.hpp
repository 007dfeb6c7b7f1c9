#pragma once

#include <vector>

#include <Eigen/Core>

#include "nlreg/lm.hpp"
#include "nlreg/loss.hpp"

namespace nlreg {

/// First two rows of the rotation matrix of q = (w, x, y, z), normalized first.
/// Throws InvalidInputError for a zero (or non-finite) quaternion.
Projection quaternion_to_orthographic(const Eigen::Vector4d& q);

/// Unit quaternion (w, x, y, z) with w >= 0 for a proper rotation matrix.
Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& R);

/// Per-frame orthographic cameras parameterized by unit quaternions.
struct CameraSequence {
  std::vector<Eigen::Vector4d> quaternions;
  /// Per frame: true when the frame had too few observations and was left as is.
  std::vector<bool> warnings;

  Eigen::Index size() const { return static_cast<Eigen::Index>(quaternions.size()); }
  Projection projection(Eigen::Index frame) const;
  std::vector<Projection> projections() const;
  static CameraSequence from_quaternions(std::vector<Eigen::Vector4d> q);
};

/// Angle in degrees between two rotations, ignoring quaternion sign.
double rotation_angle_deg(const Eigen::Vector4d& a, const Eigen::Vector4d& b);

/// Repeats a rigid 3 x N shape for F frames (3F x N).
Eigen::MatrixXd tile_shape(const Eigen::MatrixXd& shape, Eigen::Index frames);

/// Root mean square of the observed reprojection residuals.
double reprojection_rms(const MaskedObservations& W, const CameraSequence& cams,
                        const Eigen::MatrixXd& shapes);

/// Independent LM fit of each frame's quaternion to that frame's observed
/// reprojections of the fixed 3F x N shapes. Frames with fewer than three
/// observed points are returned unchanged with their warning flag set.
CameraSequence refine_cameras(const MaskedObservations& W, const Eigen::MatrixXd& shapes,
                              const CameraSequence& initial, const LMConfig& cfg = {});

struct RigidFactorization {
  CameraSequence cameras;
  Eigen::MatrixXd shape;         // 3 x N
  Eigen::VectorXd translations;  // 2F, per-row offsets of W
  int imputation_sweeps = 0;
};

/// Tomasi-Kanade factorization of a 2F x N measurement matrix under orthography.
/// Missing entries start from per-point means and are re-imputed from the rank-3
/// reconstruction until stable; the affine motion is upgraded to metric by the
/// orthonormality constraints and each 2 x 3 block is projected to the nearest
/// matrix with orthonormal rows.
RigidFactorization rigid_factorization_init(const MaskedObservations& W);

}  // namespace nlreg
