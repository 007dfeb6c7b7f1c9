#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nlreg/kernel.hpp"
#include "nlreg/lm.hpp"
#include "nlreg/loss.hpp"
#include "nlreg/robust_kpca.hpp"

namespace nlreg {

/// Number of kernel residuals for N samples: one per pair i <= j.
inline Eigen::Index kernel_residual_count(Eigen::Index n) { return n * (n + 1) / 2; }

/// Weighted kernel residuals w_ij (K(S)_ij - T_ij) for i <= j, ordered by column j
/// then row i. Weights are sqrt(rho/2) on the diagonal and sqrt(rho) off it, so
/// the sum of squares is rho/2 |K(S) - T|_F^2.
Eigen::VectorXd kernel_residuals(const Eigen::MatrixXd& S, const Eigen::MatrixXd& target,
                                 const KernelModel& k, double rho);

/// Analytic Jacobian of kernel_residuals with respect to vec(S), as triplets.
void kernel_jacobian(const Eigen::MatrixXd& S, const KernelModel& k, double rho,
                     Eigen::Index row_offset, std::vector<Eigen::Triplet<double>>& out);

/// f(W, S) + rho/2 |K(S) - target|_F^2.
double subproblem_objective(const Loss& loss, const Eigen::MatrixXd& S,
                            const Eigen::MatrixXd& target, const KernelModel& k, double rho);

/// Stacked residual problem over x = vec(S): loss residuals, then kernel residuals.
/// Its sum of squares equals subproblem_objective.
ResidualProblem make_subproblem(const Loss& loss, const Eigen::MatrixXd& target,
                                const KernelModel& k, double rho, Eigen::Index sample_dim);

struct SubproblemResult {
  Eigen::MatrixXd S;
  double initial_objective = 0.0;  // at S0
  double objective = 0.0;
  LMResult lm;
};

/// Update of the data given the feature-space factor: minimizes
/// f(W, S) + rho/2 |K(S) - C^T C|_F^2 jointly over all columns of S by LM,
/// warm-started at S0. The returned objective never exceeds the one at S0.
SubproblemResult solve_subproblem_S(const Loss& loss, const FeatureBasis& C,
                                    const Eigen::MatrixXd& S0, const KernelModel& k,
                                    double rho, const LMConfig& cfg = {});

}  // namespace nlreg
