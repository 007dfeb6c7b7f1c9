#pragma once

#include <vector>

#include <Eigen/Core>

namespace nlreg {

/// tau weighs the trace norm of C, rho the quadratic penalty |K - C^T C|_F^2 / 2.
struct ShrinkageParams {
  double tau = 0.0;
  double rho = 1.0;

  void validate() const;
};

/// Low-rank feature-space factor C = diag(spectrum) * basis^T, so that
/// C^T C = basis * diag(spectrum^2) * basis^T approximates the kernel matrix.
struct FeatureBasis {
  Eigen::VectorXd spectrum;   // nonnegative, paired with basis columns
  Eigen::MatrixXd basis;      // N x N orthogonal
  Eigen::Index effective_rank = 0;
  double objective = 0.0;     // sum_i rho/2 (lambda_i - spectrum_i^2)^2 + tau spectrum_i

  Eigen::MatrixXd factor() const;  // C, N x N
  Eigen::MatrixXd gram() const;    // C^T C
  double trace_norm() const { return spectrum.sum(); }
  /// Indices with spectrum_i > 1e-9 * max(spectrum).
  std::vector<Eigen::Index> active_components() const;
};

/// Real roots of x^3 + p x + q = 0, ascending, repeated roots reported once.
/// Trigonometric form when -4p^3 - 27q^2 > 0, Cardano otherwise; every root
/// gets two Newton polishing steps.
std::vector<double> depressed_cubic_real_roots(double p, double q);

/// g(x) = rho/2 (lambda - x^2)^2 + tau x.
double shrinkage_objective(double lambda, double x, const ShrinkageParams& params);

/// argmin of g over {0} and the nonnegative roots of x^3 - lambda x + tau/(2 rho);
/// ties resolve to the smaller candidate.
double shrink_eigenvalue(double lambda, const ShrinkageParams& params);

/// Elementwise shrink_eigenvalue; the serial variant is the test reference.
Eigen::VectorXd shrink_spectrum(const Eigen::Ref<const Eigen::VectorXd>& lambdas,
                                const ShrinkageParams& params);
Eigen::VectorXd shrink_spectrum_serial(
    const Eigen::Ref<const Eigen::VectorXd>& lambdas,
    const ShrinkageParams& params);

/// Global minimizer of rho/2 |K - C^T C|_F^2 + tau |C|_* over C, in closed form
/// from the eigendecomposition of K. Small negative eigenvalues are clamped to
/// zero; genuinely indefinite K raises NumericalFailureError.
FeatureBasis robust_kpca(const Eigen::Ref<const Eigen::MatrixXd>& K,
                         const ShrinkageParams& params);

/// Classic kernel PCA: keep the top `rank` eigenpairs, spectrum_i = sqrt(lambda_i).
/// Used as the comparison baseline for manifold and classification error.
FeatureBasis truncated_kpca(const Eigen::Ref<const Eigen::MatrixXd>& K,
                            Eigen::Index rank);

}  // namespace nlreg
