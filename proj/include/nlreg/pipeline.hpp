#pragma once

#include <vector>

#include <Eigen/Core>

#include "nlreg/kernel.hpp"
#include "nlreg/lm.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/robust_kpca.hpp"

namespace nlreg {

/// rho takes the values rho0, rho0 * rho_scale, ... while <= rho_max.
struct PenaltySchedule {
  double rho0 = 1.0;
  double rho_max = 1e4;
  double rho_scale = 10.0;

  void validate() const;
  std::vector<double> stages() const;
};

struct SolveOptions {
  double inner_tol = 1e-6;  // relative energy decrease that ends a stage
  int max_inner = 50;
  int max_outer = 1000;     // cap on the number of rho stages
  LMConfig lm;
};

struct EnergySample {
  int stage = 0;
  int inner = 0;
  double rho = 0.0;
  double after_c_step = 0.0;
  double after_s_step = 0.0;
};

struct StageSummary {
  double rho = 0.0;
  int inner_iterations = 0;
  double constraint_residual = 0.0;  // |K(S) - C^T C|_F at the end of the stage
  double energy = 0.0;
};

struct SolveReport {
  std::vector<EnergySample> energy_trace;
  std::vector<StageSummary> stages;
  Eigen::MatrixXd S;
  FeatureBasis C;
  double wall_seconds = 0.0;

  /// True when the trace never increases within any stage (C-step, then S-step,
  /// then the next inner iteration), allowing a relative slack of `tol`.
  bool stage_energy_nonincreasing(double tol = 1e-9) const;
};

/// f(W, S) + rho/2 |K(S) - C^T C|_F^2 + tau |C|_*, with |C|_* read from C's spectrum.
double energy(const Loss& loss, const Eigen::MatrixXd& S, const FeatureBasis& C,
              const KernelModel& k, double tau, double rho);

/// Penalty-method alternation: for each rho stage, repeat
///   C <- robust_kpca(K(S); tau, rho)
///   S <- solve_subproblem_S(loss, C, S)
/// until the relative energy decrease drops below inner_tol or max_inner
/// iterations pass. Stages warm-start from the previous (S, C).
SolveReport regularized_solve(const Loss& loss, const Eigen::MatrixXd& S0,
                              const KernelModel& k, double tau,
                              const PenaltySchedule& schedule, const SolveOptions& opts = {});

}  // namespace nlreg
