#include "nlreg/lm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "nlreg/error.hpp"

namespace nlreg {

namespace {

constexpr double kMaxDamping = 1e32;

// J^T J accumulated row by row; each row contributes the outer product of its
// few nonzeros.
void normal_matrix(const SparseJacobian& J, Eigen::MatrixXd& A) {
  const Eigen::Index n = J.cols();
  A.resize(n, n);
  A.setZero();
  std::vector<std::pair<Eigen::Index, double>> row;
  for (Eigen::Index r = 0; r < J.outerSize(); ++r) {
    row.clear();
    for (SparseJacobian::InnerIterator it(J, r); it; ++it)
      row.emplace_back(it.col(), it.value());
    for (const auto& [ca, va] : row)
      for (const auto& [cb, vb] : row) A(ca, cb) += va * vb;
  }
}

Eigen::VectorXd floored(const Eigen::VectorXd& diag) {
  const double top = diag.size() ? diag.maxCoeff() : 0.0;
  const double floor = top > 0.0 ? 1e-9 * top : 1.0;
  return diag.cwiseMax(floor);
}

// Diagonal blocks of J^T J for consecutive groups of `bs` unknowns (the last
// group may be shorter).
std::vector<Eigen::MatrixXd> normal_blocks(const SparseJacobian& J, Eigen::Index bs) {
  const Eigen::Index n = J.cols();
  std::vector<Eigen::MatrixXd> blocks;
  for (Eigen::Index start = 0; start < n; start += bs)
    blocks.push_back(Eigen::MatrixXd::Zero(std::min(bs, n - start), std::min(bs, n - start)));
  std::vector<std::pair<Eigen::Index, double>> row;
  for (Eigen::Index r = 0; r < J.outerSize(); ++r) {
    row.clear();
    for (SparseJacobian::InnerIterator it(J, r); it; ++it) row.emplace_back(it.col(), it.value());
    for (const auto& [ca, va] : row)
      for (const auto& [cb, vb] : row)
        if (ca / bs == cb / bs) blocks[static_cast<std::size_t>(ca / bs)](ca % bs, cb % bs) += va * vb;
  }
  return blocks;
}

// Solves (J^T J + mu D) x = b by preconditioned CG, matrix-free. The
// preconditioner inverts the damped diagonal blocks of J^T J.
Eigen::VectorXd pcg_solve(const SparseJacobian& J, const std::vector<Eigen::MatrixXd>& blocks,
                          const Eigen::VectorXd& damp_diag, double mu, const Eigen::VectorXd& b,
                          double tol) {
  const Eigen::Index n = b.size();
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
  factors.reserve(blocks.size());
  Eigen::Index start = 0;
  for (const auto& B : blocks) {
    Eigen::MatrixXd D = B;
    D.diagonal() += mu * damp_diag.segment(start, B.rows());
    factors.emplace_back(D);
    if (factors.back().info() != Eigen::Success) return Eigen::VectorXd::Constant(n, NAN);
    start += B.rows();
  }
  auto precondition = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(n);
    Eigen::Index s = 0;
    for (const auto& f : factors) {
      const Eigen::Index len = f.matrixLLT().rows();
      out.segment(s, len) = f.solve(v.segment(s, len));
      s += len;
    }
    return out;
  };
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const Eigen::VectorXd Jv = J * v;
    return J.transpose() * Jv + mu * damp_diag.cwiseProduct(v);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double stop = tol * b.norm();
  const Eigen::Index max_iter = std::max<Eigen::Index>(50, std::min<Eigen::Index>(n, 2000));
  for (Eigen::Index it = 0; it < max_iter && r.norm() > stop; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return x;
}

}  // namespace

void LMConfig::validate() const {
  if (max_iters <= 0 || !(initial_damping > 0.0) || !(damping_up > 1.0) ||
      !(damping_down > 0.0 && damping_down < 1.0) || !(step_tolerance > 0.0) ||
      !(objective_tolerance > 0.0) || dense_limit <= 0 || !(cg_tolerance > 0.0))
    throw InvalidInputError("LMConfig: all settings must be positive");
}

SparseJacobian finite_difference_jacobian(const ResidualProblem& prob,
                                          const Eigen::VectorXd& x) {
  Eigen::VectorXd r0(prob.residual_count), r1(prob.residual_count);
  prob.residuals(x, r0);
  Eigen::MatrixXd dense(prob.residual_count, prob.variable_count);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < prob.variable_count; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    prob.residuals(xp, r1);
    dense.col(i) = (r1 - r0) / h;
    xp(i) = x(i);
  }
  return dense.sparseView(0.0, 0.0);
}

LMResult lm_minimize(const ResidualProblem& prob, const Eigen::VectorXd& x0,
                     const LMConfig& cfg) {
  cfg.validate();
  if (x0.size() != prob.variable_count)
    throw ShapeMismatchError("lm_minimize: x0 has the wrong length");
  if (!x0.allFinite()) throw InvalidInputError("lm_minimize: x0 is not finite");
  if (prob.block_size < 1) throw InvalidInputError("lm_minimize: block_size must be >= 1");

  LMResult out;
  out.x = x0;
  Eigen::VectorXd r(prob.residual_count);
  prob.residuals(out.x, r);
  if (!r.allFinite())
    throw InvalidInputError("lm_minimize: non-finite residual at the start point");
  double cost = 0.5 * r.squaredNorm();
  out.initial_objective = cost;
  out.objective = cost;
  if (cost == 0.0) {
    out.stop = LMStop::ZeroResidual;
    return out;
  }

  const Eigen::Index n = prob.variable_count;
  const bool dense = n <= cfg.dense_limit;
  double mu = cfg.initial_damping;
  bool need_jacobian = true;
  SparseJacobian J;
  Eigen::MatrixXd A, M;
  Eigen::VectorXd jtj_diag, damp_diag, g;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd trial(n), r_trial(prob.residual_count);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    out.iterations = iter;
    if (need_jacobian) {
      if (prob.jacobian) {
        prob.jacobian(out.x, J);
      } else {
        J = finite_difference_jacobian(prob, out.x);
      }
      g = J.transpose() * r;
      if (dense) {
        normal_matrix(J, A);
        jtj_diag = A.diagonal();
      } else {
        blocks = normal_blocks(J, prob.block_size);
        jtj_diag.resize(n);
        Eigen::Index s = 0;
        for (const auto& B : blocks) {
          jtj_diag.segment(s, B.rows()) = B.diagonal();
          s += B.rows();
        }
      }
      damp_diag = floored(jtj_diag);
      need_jacobian = false;
      if (g.lpNorm<Eigen::Infinity>() <= 1e-300) {
        out.stop = LMStop::SmallGradient;
        break;
      }
    }

    Eigen::VectorXd step;
    bool solved = true;
    if (dense) {
      // Factor in place in a reused buffer; these matrices are large.
      M = A;
      M.diagonal() += mu * damp_diag;
      Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(M);
      solved = llt.info() == Eigen::Success;
      if (solved) step = llt.solve(-g);
    } else {
      step = pcg_solve(J, blocks, damp_diag, mu, -g, cfg.cg_tolerance);
    }
    solved = solved && step.allFinite();

    bool accepted = false;
    double new_cost = cost;
    if (solved) {
      trial = out.x + step;
      if (prob.project) prob.project(trial);
      if (trial.allFinite()) {
        prob.residuals(trial, r_trial);
        new_cost = 0.5 * r_trial.squaredNorm();
        accepted = std::isfinite(new_cost) && new_cost < cost;
      }
    }

    const bool tiny_step =
        solved && step.norm() <= cfg.step_tolerance * (out.x.norm() + cfg.step_tolerance);
    if (accepted) {
      const double decrease = cost - new_cost;
      out.x = trial;
      r.swap(r_trial);
      cost = new_cost;
      mu = std::max(mu * cfg.damping_down, 1e-15);
      need_jacobian = true;
      out.log.push_back({iter, cost, mu, true});
      if (decrease <= cfg.objective_tolerance * (cost + decrease)) {
        out.stop = LMStop::ObjectiveTolerance;
        break;
      }
      if (tiny_step) {
        out.stop = LMStop::StepTolerance;
        break;
      }
      if (cost == 0.0) {
        out.stop = LMStop::ZeroResidual;
        break;
      }
    } else {
      mu *= cfg.damping_up;
      out.log.push_back({iter, cost, mu, false});
      if (tiny_step) {
        out.stop = LMStop::StepTolerance;
        break;
      }
      if (mu > kMaxDamping) {
        out.stop = LMStop::DampingOverflow;
        break;
      }
    }
  }
  out.objective = cost;
  return out;
}

}  // namespace nlreg
