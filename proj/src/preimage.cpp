#include "nlreg/preimage.hpp"

#include <cmath>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

inline Eigen::Index pair_index(Eigen::Index i, Eigen::Index j) { return j * (j + 1) / 2 + i; }

inline double pair_weight(Eigen::Index i, Eigen::Index j, double rho) {
  return i == j ? std::sqrt(0.5 * rho) : std::sqrt(rho);
}

// First triplet slot of column j: every off-diagonal pair owns 2d slots, the
// diagonal owns d slots for the linear kernel and none for RBF.
inline Eigen::Index triplet_offset(Eigen::Index j, Eigen::Index d, Eigen::Index diag_slots) {
  return d * j * (j - 1) + j * diag_slots;
}

void check_shapes(const Eigen::MatrixXd& S, const Eigen::MatrixXd& target) {
  if (target.rows() != S.cols() || target.cols() != S.cols())
    throw ShapeMismatchError("kernel target must be N x N for N samples");
}

}  // namespace

Eigen::VectorXd kernel_residuals(const Eigen::MatrixXd& S, const Eigen::MatrixXd& target,
                                 const KernelModel& k, double rho) {
  check_shapes(S, target);
  const Eigen::MatrixXd K = kernel_matrix(S, k);
  const Eigen::Index n = S.cols();
  Eigen::VectorXd r(kernel_residual_count(n));
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      r(pair_index(i, j)) = pair_weight(i, j, rho) * (K(i, j) - target(i, j));
  return r;
}

void kernel_jacobian(const Eigen::MatrixXd& S, const KernelModel& k, double rho,
                     Eigen::Index row_offset, std::vector<Eigen::Triplet<double>>& out) {
  const Eigen::Index d = S.rows(), n = S.cols();
  const bool rbf = k.family == KernelFamily::Rbf;
  const Eigen::Index diag_slots = rbf ? 0 : d;
  const Eigen::MatrixXd K = rbf ? kernel_matrix(S, k) : Eigen::MatrixXd();
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(triplet_offset(n, d, diag_slots)));

#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index j = 0; j < n; ++j) {
    auto slot = out.begin() + static_cast<std::ptrdiff_t>(base) +
                static_cast<std::ptrdiff_t>(triplet_offset(j, d, diag_slots));
    for (Eigen::Index i = 0; i <= j; ++i) {
      const Eigen::Index row = row_offset + pair_index(i, j);
      const double w = pair_weight(i, j, rho);
      if (i == j) {
        if (rbf) continue;  // K_ii = 1 is constant
        for (Eigen::Index a = 0; a < d; ++a)
          *slot++ = Eigen::Triplet<double>(row, j * d + a, 2.0 * w * S(a, j));
        continue;
      }
      for (Eigen::Index a = 0; a < d; ++a) {
        double di, dj;
        if (rbf) {
          const double c = -2.0 * k.gamma * K(i, j) * (S(a, i) - S(a, j));
          di = c;
          dj = -c;
        } else {
          di = S(a, j);
          dj = S(a, i);
        }
        *slot++ = Eigen::Triplet<double>(row, i * d + a, w * di);
        *slot++ = Eigen::Triplet<double>(row, j * d + a, w * dj);
      }
    }
  }
}

double subproblem_objective(const Loss& loss, const Eigen::MatrixXd& S,
                            const Eigen::MatrixXd& target, const KernelModel& k, double rho) {
  return loss.value(S) + kernel_residuals(S, target, k, rho).squaredNorm();
}

ResidualProblem make_subproblem(const Loss& loss, const Eigen::MatrixXd& target,
                                const KernelModel& k, double rho, Eigen::Index sample_dim) {
  const Eigen::Index n = target.rows();
  if (loss.variable_rows() != sample_dim || loss.variable_cols() != n)
    throw ShapeMismatchError("subproblem: loss and kernel target disagree on S's shape");
  const Eigen::Index m_loss = loss.residual_count();

  ResidualProblem prob;
  prob.variable_count = sample_dim * n;
  prob.residual_count = m_loss + kernel_residual_count(n);
  prob.residuals = [&loss, target, k, rho, sample_dim, n, m_loss](const Eigen::VectorXd& x,
                                                                  Eigen::VectorXd& r) {
    const Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(x.data(), sample_dim, n);
    loss.residuals(S, r.head(m_loss));
    if (!S.allFinite()) {
      r.tail(r.size() - m_loss).setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    r.tail(r.size() - m_loss) = kernel_residuals(S, target, k, rho);
  };
  prob.jacobian = [&loss, k, rho, sample_dim, n, m_loss, prob_rows = prob.residual_count](
                      const Eigen::VectorXd& x, SparseJacobian& J) {
    const Eigen::MatrixXd S = Eigen::Map<const Eigen::MatrixXd>(x.data(), sample_dim, n);
    std::vector<Eigen::Triplet<double>> trips;
    loss.jacobian(S, 0, trips);
    kernel_jacobian(S, k, rho, m_loss, trips);
    J.resize(prob_rows, sample_dim * n);
    J.setFromTriplets(trips.begin(), trips.end());
  };
  prob.block_size = sample_dim;
  return prob;
}

SubproblemResult solve_subproblem_S(const Loss& loss, const FeatureBasis& C,
                                    const Eigen::MatrixXd& S0, const KernelModel& k,
                                    double rho, const LMConfig& cfg) {
  check_data_matrix(S0);
  k.validate();
  if (!(rho >= 0.0)) throw InvalidInputError("subproblem: rho must be >= 0");
  const Eigen::MatrixXd target = C.gram();
  check_shapes(S0, target);

  const ResidualProblem prob = make_subproblem(loss, target, k, rho, S0.rows());
  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(S0.data(), S0.size());

  SubproblemResult out;
  out.lm = lm_minimize(prob, x0, cfg);
  out.S = Eigen::Map<const Eigen::MatrixXd>(out.lm.x.data(), S0.rows(), S0.cols());
  // LM reports 1/2 of the sum of squares.
  out.initial_objective = 2.0 * out.lm.initial_objective;
  out.objective = 2.0 * out.lm.objective;
  return out;
}

}  // namespace nlreg
