#include <cmath>

#include "hgbd/nlp/ipm.hpp"

namespace hgbd {

Vector inequality_slacks(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x) {
  const ConstraintValues cv = evaluate_constraints(inst, x, y);
  const auto q = static_cast<Eigen::Index>(inst.q());
  const auto n = static_cast<Eigen::Index>(inst.n());
  const auto& fu = inst.finite_upper();
  Vector s(static_cast<Eigen::Index>(inst.inequality_count()));
  s.head(q) = -cv.g;
  s.segment(q, n) = x - inst.lower();
  for (std::size_t k = 0; k < fu.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(fu[k]);
    s[q + n + static_cast<Eigen::Index>(k)] = inst.upper()[j] - x[j];
  }
  return s;
}

ResidualTriple kkt_residuals(const MinlpInstance& inst, const BinaryAssignment& y,
                             const Vector& x, const Vector& lambda, const Vector& mu) {
  if (static_cast<std::size_t>(lambda.size()) != inst.p()) throw DimensionError("lambda has wrong length");
  if (static_cast<std::size_t>(mu.size()) != inst.inequality_count()) throw DimensionError("mu has wrong length");
  const auto n = static_cast<Eigen::Index>(inst.n());
  const auto q = static_cast<Eigen::Index>(inst.q());
  const std::span<const double> xs{x.data(), static_cast<std::size_t>(x.size())};

  Vector stat(n);
  for (Eigen::Index j = 0; j < n; ++j) stat[j] = inst.f_derivatives().grad[static_cast<std::size_t>(j)].eval(xs);
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto& grad = inst.g_derivatives()[static_cast<std::size_t>(i)].grad;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Expr& gij = grad[static_cast<std::size_t>(j)];
      if (!gij.is_zero()) stat[j] += mu[i] * gij.eval(xs);
    }
  }
  for (std::size_t k = 0; k < inst.p(); ++k) {
    const auto& grad = inst.h_derivatives()[k].grad;
    for (Eigen::Index j = 0; j < n; ++j) stat[j] += lambda[static_cast<Eigen::Index>(k)] * grad[static_cast<std::size_t>(j)].eval(xs);
  }
  stat -= mu.segment(q, n);
  const auto& fu = inst.finite_upper();
  for (std::size_t k = 0; k < fu.size(); ++k) {
    stat[static_cast<Eigen::Index>(fu[k])] += mu[q + n + static_cast<Eigen::Index>(k)];
  }

  const ConstraintValues cv = evaluate_constraints(inst, x, y);
  const Vector slack = inequality_slacks(inst, y, x);
  // Violations: positive parts of g+By and of the bound rows, plus h+Ay.
  const double primal_sq = (-slack).cwiseMax(0.0).squaredNorm() + cv.h.squaredNorm();

  ResidualTriple r;
  r.stationarity = stat.norm();
  r.primal_feasibility = std::sqrt(primal_sq);
  r.complementarity = mu.cwiseProduct(slack).norm();
  return r;
}

}  // namespace hgbd
