#include "nlreg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

inline double squared_distance(const Eigen::Ref<const Eigen::MatrixXd>& A,
                               Eigen::Index i,
                               const Eigen::Ref<const Eigen::MatrixXd>& B,
                               Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    const double diff = A(r, i) - B(r, j);
    acc += diff * diff;
  }
  return acc;
}

inline double kernel_entry(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           Eigen::Index i,
                           const Eigen::Ref<const Eigen::MatrixXd>& B,
                           Eigen::Index j, const KernelModel& k) {
  if (k.family == KernelFamily::Linear) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < A.rows(); ++r) acc += A(r, i) * B(r, j);
    return acc;
  }
  return std::exp(-k.gamma * squared_distance(A, i, B, j));
}

// Row i of the upper triangle; shared by the parallel and serial drivers so
// both produce identical bits.
inline void fill_kernel_row(const Eigen::Ref<const Eigen::MatrixXd>& S,
                            const KernelModel& k, Eigen::Index i,
                            Eigen::MatrixXd& K) {
  for (Eigen::Index j = i; j < S.cols(); ++j) {
    const double v = (i == j && k.family == KernelFamily::Rbf)
                         ? 1.0
                         : kernel_entry(S, i, S, j, k);
    K(i, j) = v;
    K(j, i) = v;
  }
}

inline void fill_distance_row(const Eigen::Ref<const Eigen::MatrixXd>& S,
                              Eigen::Index i, Eigen::MatrixXd& D) {
  D(i, i) = 0.0;
  for (Eigen::Index j = i + 1; j < S.cols(); ++j) {
    const double v = std::sqrt(squared_distance(S, i, S, j));
    D(i, j) = v;
    D(j, i) = v;
  }
}

}  // namespace

void KernelModel::validate() const {
  if (family == KernelFamily::Rbf && !(gamma > 0.0 && std::isfinite(gamma)))
    throw InvalidInputError("RBF kernel requires a finite gamma > 0");
}

double KernelModel::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (family == KernelFamily::Linear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

void check_data_matrix(const Eigen::Ref<const Eigen::MatrixXd>& S) {
  if (S.rows() < 1 || S.cols() < 1)
    throw InvalidInputError("data matrix must have d >= 1 and N >= 1");
  if (!S.allFinite())
    throw InvalidInputError("data matrix contains non-finite entries");
}

Eigen::MatrixXd kernel_matrix(const Eigen::Ref<const Eigen::MatrixXd>& S,
                              const KernelModel& k) {
  check_data_matrix(S);
  k.validate();
  const Eigen::Index n = S.cols();
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) fill_kernel_row(S, k, i, K);
  return K;
}

Eigen::MatrixXd kernel_matrix_serial(const Eigen::Ref<const Eigen::MatrixXd>& S,
                                     const KernelModel& k) {
  check_data_matrix(S);
  k.validate();
  const Eigen::Index n = S.cols();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) fill_kernel_row(S, k, i, K);
  return K;
}

Eigen::MatrixXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& A,
                             const Eigen::Ref<const Eigen::MatrixXd>& B,
                             const KernelModel& k) {
  check_data_matrix(A);
  check_data_matrix(B);
  k.validate();
  if (A.rows() != B.rows())
    throw ShapeMismatchError("cross_kernel: input dimensions differ");
  Eigen::MatrixXd out(A.cols(), B.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < B.cols(); ++j)
    for (Eigen::Index i = 0; i < A.cols(); ++i)
      out(i, j) = kernel_entry(A, i, B, j, k);
  return out;
}

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& S) {
  check_data_matrix(S);
  const Eigen::Index n = S.cols();
  Eigen::MatrixXd D(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) fill_distance_row(S, i, D);
  return D;
}

Eigen::MatrixXd pairwise_distances_serial(
    const Eigen::Ref<const Eigen::MatrixXd>& S) {
  check_data_matrix(S);
  const Eigen::Index n = S.cols();
  Eigen::MatrixXd D(n, n);
  for (Eigen::Index i = 0; i < n; ++i) fill_distance_row(S, i, D);
  return D;
}

double select_width(const Eigen::Ref<const Eigen::MatrixXd>& S,
                    WidthCriterion criterion) {
  check_data_matrix(S);
  const Eigen::Index n = S.cols();
  if (n < 2) throw DegenerateDataError("width selection needs N >= 2 samples");
  const Eigen::MatrixXd D = pairwise_distances(S);

  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) upper.push_back(D(i, j));

  double dist = 0.0;
  if (criterion == WidthCriterion::DMax) {
    dist = *std::max_element(upper.begin(), upper.end());
  } else {
    const std::size_t m = upper.size();
    const auto mid = upper.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(upper.begin(), mid, upper.end());
    dist = *mid;
    if (m % 2 == 0) {
      const double lower = *std::max_element(upper.begin(), mid);
      dist = 0.5 * (lower + dist);
    }
  }
  if (!(dist > 0.0))
    throw DegenerateDataError(
        "width selection: reference pairwise distance is zero");
  const double target = criterion == WidthCriterion::DMax ? 4.5 : std::log(2.0);
  return target / (dist * dist);
}

EigenDecomposition sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& K) {
  if (K.rows() != K.cols() || K.rows() == 0)
    throw ShapeMismatchError("sym_eig: matrix must be square and non-empty");
  if (!K.allFinite())
    throw InvalidInputError("sym_eig: matrix contains non-finite entries");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidInputError("sym_eig: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
  if (solver.info() != Eigen::Success)
    throw NumericalFailureError("sym_eig: eigen solver did not converge");

  // Eigen returns ascending order.
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

void clamp_psd(Eigen::VectorXd& eigenvalues, double max_abs_entry) {
  if (eigenvalues.size() == 0) return;
  const double lmax = eigenvalues.maxCoeff();
  const double n = static_cast<double>(eigenvalues.size());
  const double tol =
      std::max(1e-8 * std::max(lmax, 0.0),
               64.0 * std::numeric_limits<double>::epsilon() * n * max_abs_entry);
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double& l = eigenvalues(i);
    if (l >= 0.0) continue;
    if (l < -tol)
      throw NumericalFailureError("kernel matrix is indefinite: eigenvalue " +
                                  std::to_string(l));
    l = 0.0;
  }
}

}  // namespace nlreg
