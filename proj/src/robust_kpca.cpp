#include "nlreg/robust_kpca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlreg/error.hpp"
#include "nlreg/kernel.hpp"

namespace nlreg {

namespace {

constexpr double kRankTolerance = 1e-9;

double polish(double x, double p, double q) {
  for (int step = 0; step < 2; ++step) {
    const double f = (x * x + p) * x + q;
    const double df = 3.0 * x * x + p;
    if (df == 0.0) break;
    const double next = x - f / df;
    const double fnext = (next * next + p) * next + q;
    // Near a double root f' vanishes; keep the step only if it helps.
    if (std::abs(fnext) <= std::abs(f)) x = next;
  }
  return x;
}

}  // namespace

void ShrinkageParams::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw InvalidInputError("shrinkage: tau must be finite and >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw InvalidInputError("shrinkage: rho must be finite and > 0");
}

Eigen::MatrixXd FeatureBasis::factor() const {
  return spectrum.asDiagonal() * basis.transpose();
}

Eigen::MatrixXd FeatureBasis::gram() const {
  const Eigen::MatrixXd scaled = basis * spectrum.array().square().matrix().asDiagonal();
  Eigen::MatrixXd G = scaled * basis.transpose();
  return 0.5 * (G + G.transpose());
}

std::vector<Eigen::Index> FeatureBasis::active_components() const {
  std::vector<Eigen::Index> idx;
  if (spectrum.size() == 0) return idx;
  const double cutoff = kRankTolerance * spectrum.maxCoeff();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i)
    if (spectrum(i) > cutoff) idx.push_back(i);
  return idx;
}

std::vector<double> depressed_cubic_real_roots(double p, double q) {
  if (!std::isfinite(p) || !std::isfinite(q))
    throw InvalidInputError("depressed cubic: non-finite coefficient");
  std::vector<double> roots;
  if (p == 0.0 && q == 0.0) return {0.0};

  const double disc = -4.0 * p * p * p - 27.0 * q * q;
  if (disc > 0.0) {
    // Three distinct real roots; disc > 0 forces p < 0.
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
  } else if (disc == 0.0) {
    // p != 0 here: a simple root and a double root.
    roots.push_back(3.0 * q / p);
    roots.push_back(-1.5 * q / p);
  } else {
    const double half_q = 0.5 * q;
    const double s = std::sqrt(half_q * half_q + p * p * p / 27.0);
    // Pick the cube-root argument that avoids cancellation; u v = -p/3.
    const double u = std::cbrt(-half_q - std::copysign(s, half_q));
    const double v = (u == 0.0) ? 0.0 : -p / (3.0 * u);
    roots.push_back(u + v);
  }

  for (double& r : roots) r = polish(r, p, q);
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (!unique.empty() &&
        std::abs(r - unique.back()) <= 1e-12 * std::max(1.0, std::abs(r)))
      continue;
    unique.push_back(r);
  }
  return unique;
}

double shrinkage_objective(double lambda, double x, const ShrinkageParams& params) {
  const double gap = lambda - x * x;
  return 0.5 * params.rho * gap * gap + params.tau * x;
}

double shrink_eigenvalue(double lambda, const ShrinkageParams& params) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidInputError("shrink_eigenvalue: lambda must be finite and >= 0");
  // Candidates arrive ascending, so strict improvement keeps the smaller one on ties.
  double best = 0.0;
  double best_g = shrinkage_objective(lambda, 0.0, params);
  for (double r : depressed_cubic_real_roots(-lambda, params.tau / (2.0 * params.rho))) {
    if (r <= 0.0) continue;
    const double g = shrinkage_objective(lambda, r, params);
    if (g < best_g) {
      best = r;
      best_g = g;
    }
  }
  return best;
}

Eigen::VectorXd shrink_spectrum(const Eigen::Ref<const Eigen::VectorXd>& lambdas,
                                const ShrinkageParams& params) {
  params.validate();
  Eigen::VectorXd out(lambdas.size());
  const Eigen::Index n = lambdas.size();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out(i) = shrink_eigenvalue(lambdas(i), params);
  return out;
}

Eigen::VectorXd shrink_spectrum_serial(
    const Eigen::Ref<const Eigen::VectorXd>& lambdas,
    const ShrinkageParams& params) {
  params.validate();
  Eigen::VectorXd out(lambdas.size());
  for (Eigen::Index i = 0; i < lambdas.size(); ++i)
    out(i) = shrink_eigenvalue(lambdas(i), params);
  return out;
}

FeatureBasis robust_kpca(const Eigen::Ref<const Eigen::MatrixXd>& K,
                         const ShrinkageParams& params) {
  params.validate();
  EigenDecomposition eig = sym_eig(K);
  clamp_psd(eig.eigenvalues, K.cwiseAbs().maxCoeff());

  FeatureBasis out;
  out.spectrum = shrink_spectrum(eig.eigenvalues, params);
  out.basis = std::move(eig.eigenvectors);
  out.effective_rank = static_cast<Eigen::Index>(out.active_components().size());
  out.objective = 0.0;
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i)
    out.objective += shrinkage_objective(eig.eigenvalues(i), out.spectrum(i), params);
  return out;
}

FeatureBasis truncated_kpca(const Eigen::Ref<const Eigen::MatrixXd>& K,
                            Eigen::Index rank) {
  if (rank < 0) throw InvalidInputError("truncated_kpca: negative rank");
  EigenDecomposition eig = sym_eig(K);
  clamp_psd(eig.eigenvalues, K.cwiseAbs().maxCoeff());
  FeatureBasis out;
  out.spectrum = Eigen::VectorXd::Zero(eig.eigenvalues.size());
  const Eigen::Index keep = std::min(rank, eig.eigenvalues.size());
  out.spectrum.head(keep) = eig.eigenvalues.head(keep).cwiseSqrt();
  out.basis = std::move(eig.eigenvectors);
  out.effective_rank = static_cast<Eigen::Index>(out.active_components().size());
  return out;
}

}  // namespace nlreg
