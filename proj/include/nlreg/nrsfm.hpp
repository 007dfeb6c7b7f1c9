#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nlreg/cameras.hpp"
#include "nlreg/kernel.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/pipeline.hpp"
#include "nlreg/tnh.hpp"

namespace nlreg {

struct NrsfmOptions {
  double tau = 1e-4;
  KernelFamily family = KernelFamily::Rbf;
  WidthCriterion width = WidthCriterion::DMed;
  std::optional<double> gamma;  // fixed RBF gamma; overrides `width`
  PenaltySchedule schedule;
  /// Frame samples are 3N long, so each S update gets a smaller budget than
  /// the SolveOptions defaults.
  SolveOptions solve = {.max_inner = 10, .lm = {.max_iters = 10}};
  /// Shape / camera alternation rounds when cameras are estimated.
  int rounds = 5;
  double tnh_tau = 1e-3;
  TnhOptions tnh;
  LMConfig camera_lm;
};

struct NrsfmResult {
  Eigen::MatrixXd shapes;         // 3F x N
  Eigen::MatrixXd tnh_shapes;     // 3F x N, the trace-norm initialization
  CameraSequence cameras;
  KernelModel kernel;
  std::vector<SolveReport> rounds;
  std::vector<double> reprojection;  // rms after each round
};

/// Kernel NRSfM. Observations are 2F x N and assumed centred per frame (the
/// orthographic model has no translation). With `cameras` the rotations stay
/// fixed and one shape solve runs; otherwise cameras start from rigid
/// factorization, then shapes and cameras alternate for opts.rounds rounds.
/// Shapes start from the trace-norm solution, which also fixes the kernel width.
NrsfmResult solve_nrsfm(const MaskedObservations& W,
                        const std::optional<CameraSequence>& cameras,
                        const NrsfmOptions& opts = {});

}  // namespace nlreg
