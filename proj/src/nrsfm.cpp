#include "nlreg/nrsfm.hpp"

#include "nlreg/error.hpp"

namespace nlreg {

NrsfmResult solve_nrsfm(const MaskedObservations& W,
                        const std::optional<CameraSequence>& cameras,
                        const NrsfmOptions& opts) {
  W.validate();
  if (W.values.rows() % 2 != 0) throw ShapeMismatchError("nrsfm: observations must be 2F x N");
  if (opts.rounds < 1) throw InvalidInputError("nrsfm: rounds must be >= 1");
  opts.schedule.validate();
  const Eigen::Index F = W.values.rows() / 2;

  NrsfmResult out;
  if (cameras) {
    if (cameras->size() != F) throw ShapeMismatchError("nrsfm: one camera per frame required");
    out.cameras = *cameras;
  } else {
    const RigidFactorization rigid = rigid_factorization_init(W);
    out.cameras = refine_cameras(W, tile_shape(rigid.shape, F), rigid.cameras, opts.camera_lm);
  }

  out.tnh_shapes = tnh_solve(W, out.cameras, opts.tnh_tau, opts.tnh).X;
  Eigen::MatrixXd samples = frames_to_samples(out.tnh_shapes);

  if (opts.family == KernelFamily::Linear) {
    out.kernel = KernelModel::linear();
  } else {
    out.kernel = KernelModel::rbf(opts.gamma ? *opts.gamma : select_width(samples, opts.width));
  }
  out.kernel.validate();

  const int rounds = cameras ? 1 : opts.rounds;
  for (int round = 0; round < rounds; ++round) {
    const NrsfmLoss loss(W, out.cameras.projections());
    // Later rounds warm-start from a converged solution, so only the final penalty is run.
    PenaltySchedule schedule = opts.schedule;
    if (round > 0) schedule.rho0 = schedule.stages().back();
    out.rounds.push_back(regularized_solve(loss, samples, out.kernel, opts.tau, schedule, opts.solve));
    samples = out.rounds.back().S;
    if (!cameras)
      out.cameras = refine_cameras(W, samples_to_frames(samples), out.cameras, opts.camera_lm);
    out.reprojection.push_back(reprojection_rms(W, out.cameras, samples_to_frames(samples)));
  }
  out.shapes = samples_to_frames(samples);
  return out;
}

}  // namespace nlreg
