#include "nlreg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "nlreg/error.hpp"
#include "nlreg/preimage.hpp"

namespace nlreg {

void PenaltySchedule::validate() const {
  if (!(rho0 > 0.0) || !(rho_scale > 1.0) || !(rho_max >= rho0) || !std::isfinite(rho_max))
    throw InvalidInputError("penalty schedule needs rho0 > 0, rho_scale > 1, rho_max >= rho0");
}

std::vector<double> PenaltySchedule::stages() const {
  validate();
  std::vector<double> out;
  // Relative slack so that 1 * 10^4 still counts as <= 1e4 after rounding.
  for (double rho = rho0; rho <= rho_max * (1.0 + 1e-12); rho *= rho_scale) out.push_back(rho);
  return out;
}

bool SolveReport::stage_energy_nonincreasing(double tol) const {
  for (std::size_t i = 0; i < energy_trace.size(); ++i) {
    const auto& e = energy_trace[i];
    if (e.after_s_step > e.after_c_step + tol * std::abs(e.after_c_step)) return false;
    if (i > 0 && energy_trace[i - 1].stage == e.stage) {
      const double prev = energy_trace[i - 1].after_s_step;
      if (e.after_c_step > prev + tol * std::abs(prev)) return false;
    }
  }
  return true;
}

double energy(const Loss& loss, const Eigen::MatrixXd& S, const FeatureBasis& C,
              const KernelModel& k, double tau, double rho) {
  if (C.basis.rows() != S.cols())
    throw ShapeMismatchError("energy: feature basis does not match the sample count");
  const Eigen::MatrixXd gap = kernel_matrix(S, k) - C.gram();
  return loss.value(S) + 0.5 * rho * gap.squaredNorm() + tau * C.trace_norm();
}

SolveReport regularized_solve(const Loss& loss, const Eigen::MatrixXd& S0,
                              const KernelModel& k, double tau,
                              const PenaltySchedule& schedule, const SolveOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  check_data_matrix(S0);
  k.validate();
  if (!(tau >= 0.0)) throw InvalidInputError("regularized_solve: tau must be >= 0");
  if (opts.max_inner <= 0 || opts.max_outer <= 0 || !(opts.inner_tol >= 0.0))
    throw InvalidInputError("regularized_solve: iteration limits must be positive");

  SolveReport report;
  report.S = S0;
  int stage = 0;
  for (double rho : schedule.stages()) {
    if (stage >= opts.max_outer) break;
    const ShrinkageParams params{tau, rho};
    double previous = std::numeric_limits<double>::infinity();
    int inner = 0;
    for (; inner < opts.max_inner; ++inner) {
      report.C = robust_kpca(kernel_matrix(report.S, k), params);
      const double e_c = energy(loss, report.S, report.C, k, tau, rho);
      const SubproblemResult sub = solve_subproblem_S(loss, report.C, report.S, k, rho, opts.lm);
      report.S = sub.S;
      const double e_s = energy(loss, report.S, report.C, k, tau, rho);
      if (!std::isfinite(e_c) || !std::isfinite(e_s))
        throw NumericalFailureError("regularized_solve: energy became non-finite at stage " +
                                    std::to_string(stage) + ", inner iteration " +
                                    std::to_string(inner));
      report.energy_trace.push_back({stage, inner, rho, e_c, e_s});
      const double reference = std::isfinite(previous) ? previous : e_c;
      if (reference - e_s <= opts.inner_tol * std::abs(reference)) {
        ++inner;
        break;
      }
      previous = e_s;
    }
    const Eigen::MatrixXd gap = kernel_matrix(report.S, k) - report.C.gram();
    report.stages.push_back({rho, inner, gap.norm(),
                             report.energy_trace.back().after_s_step});
    ++stage;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nlreg
