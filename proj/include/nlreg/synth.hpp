#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nlreg/cameras.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/metrics.hpp"

namespace nlreg {

/// Smooth 3-parameter surfaces embedded in `dim` dimensions, one per class.
/// Class c maps u in [-1, 1]^3 to offset_c + A_c * features_c(u), where the
/// features mix the raw coordinates with sinusoids and products of them.
class ManifoldFamily {
 public:
  ManifoldFamily(int classes, int dim, std::uint64_t seed);

  int classes() const { return static_cast<int>(maps_.size()); }
  int dim() const { return dim_; }
  Eigen::VectorXd point(int cls, const Eigen::Vector3d& u) const;

  static constexpr int kFeatureCount = 9;

 private:
  int dim_;
  std::vector<Eigen::MatrixXd> maps_;
  std::vector<Eigen::VectorXd> offsets_;
};

struct ManifoldSample {
  LabeledData noisy;       // d x N with labels
  Eigen::MatrixXd clean;   // d x N, exactly on the surfaces
  Eigen::MatrixXd latent;  // 3 x N surface parameters
};

/// n_per_class points per class on the surfaces of ManifoldFamily(classes, dim, seed),
/// samples ordered class by class, plus i.i.d. N(0, noise_sigma^2) noise.
/// Deterministic for a given seed.
ManifoldSample synth_manifold(int n_per_class, int dim, double noise_sigma,
                              std::uint64_t seed, int classes = 3);

struct NrsfmInstance {
  MaskedObservations W;    // 2F x N
  Eigen::MatrixXd shapes;  // 3F x N ground truth, centred per frame
  CameraSequence cameras;  // ground truth
};

/// Two rigid segments joined at the origin; the second swings about a tilted
/// hinge axis by deformation_amplitude * sin(phase(t)) radians. Cameras follow
/// a random walk of rotations; each (frame, point) is hidden with probability
/// missing_prob; observed 2-D entries receive N(0, noise^2) noise.
NrsfmInstance synth_nrsfm(int frames, int points, double deformation_amplitude,
                          double missing_prob, double noise, std::uint64_t seed);

/// Bernoulli(p) deletion mask (true = deleted) for an rows x cols matrix.
MaskMatrix random_deletion_mask(Eigen::Index rows, Eigen::Index cols, double p,
                                std::uint64_t seed);

}  // namespace nlreg
