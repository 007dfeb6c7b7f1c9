#pragma once

#include <Eigen/Core>

namespace nlreg {

enum class KernelFamily { Rbf, Linear };

/// Mercer kernel k(a, b). For Rbf, k = exp(-gamma * |a - b|^2); gamma is the
/// inverse squared length scale and is ignored for Linear.
struct KernelModel {
  KernelFamily family = KernelFamily::Rbf;
  double gamma = 1.0;

  static KernelModel rbf(double gamma) { return {KernelFamily::Rbf, gamma}; }
  static KernelModel linear() { return {KernelFamily::Linear, 0.0}; }

  /// Throws InvalidInputError unless gamma > 0 (finite) for Rbf.
  void validate() const;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) const;
};

enum class WidthCriterion { DMax, DMed };

/// Eigenvalues sorted nonincreasing, eigenvectors in matching columns.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Throws InvalidInputError on an empty matrix or a non-finite entry.
void check_data_matrix(const Eigen::Ref<const Eigen::MatrixXd>& S);

/// Gram matrix of the columns of S (d x N). The result is exactly symmetric.
Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& S,
                              const KernelModel& k);
/// Single-threaded reference for kernel_matrix; bit-identical output.
Eigen::MatrixXd kernel_matrix_serial(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                     const KernelModel& k);

/// Cross-kernel between the columns of A (d x Na) and B (d x Nb): Na x Nb.
Eigen::MatrixXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& A,
                             const Eigen::Ref<const Eigen::MatrixXd>& B,
                             const KernelModel& k);

/// Euclidean distances between all column pairs, accumulated coordinate-wise
/// as |a - b| (no |a|^2 + |b|^2 - 2ab expansion).
Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& S);
Eigen::MatrixXd pairwise_distances_serial(
    const Eigen::Ref<const Eigen::MatrixXd>& S);

/// RBF gamma from the pairwise distances of S's columns.
///   DMax: k(d_max) = exp(-9/2), gamma = 4.5 / d_max^2
///   DMed: k(d_med) = 1/2,       gamma = ln 2 / d_med^2
/// d_med is the median over the N(N-1)/2 distinct pairs (mean of the two
/// middle values for an even count).
double select_width(const Eigen::Ref<const Eigen::MatrixXd>& S,
                    WidthCriterion criterion);

/// Symmetric eigendecomposition, eigenvalues descending. Requires symmetry to
/// within 1e-10 (scaled by max(1, max|K|)).
EigenDecomposition sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& K);

/// Clamps eigenvalues in [-tol, 0) to zero where
/// tol = max(1e-8 * lambda_max, 64 * eps * N * max|K|); anything more negative
/// raises NumericalFailureError, since a kernel matrix must be PSD.
void clamp_psd(Eigen::VectorXd& eigenvalues, double max_abs_entry);

}  // namespace nlreg
