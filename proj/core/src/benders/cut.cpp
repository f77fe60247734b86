#include "hgbd/benders/cut.hpp"

#include <cmath>

namespace hgbd {

OptimalityCut build_cut(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x,
                        const Vector& lambda, const Vector& mu, CutSource source) {
  const auto q = static_cast<Eigen::Index>(inst.q());
  if (static_cast<std::size_t>(x.size()) != inst.n()) throw DimensionError("cut: x has wrong length");
  if (static_cast<std::size_t>(lambda.size()) != inst.p()) throw DimensionError("cut: lambda has wrong length");
  if (mu.size() < q) throw DimensionError("cut: mu shorter than the number of g rows");
  if (y.size() != inst.m()) throw DimensionError("cut: y has wrong length");

  const std::span<const double> xs{x.data(), static_cast<std::size_t>(x.size())};
  const Vector mu_g = mu.head(q);

  OptimalityCut cut;
  cut.constant = inst.f().eval(xs);
  for (std::size_t j = 0; j < inst.p(); ++j) {
    cut.constant += lambda[static_cast<Eigen::Index>(j)] * inst.h()[j].eval(xs);
  }
  for (Eigen::Index i = 0; i < q; ++i) {
    if (mu_g[i] != 0.0) cut.constant += mu_g[i] * inst.g()[static_cast<std::size_t>(i)].eval(xs);
  }
  cut.coeff = inst.e() + inst.A().transpose() * lambda + inst.B().transpose() * mu_g;
  if (!cut.coeff.allFinite() || !std::isfinite(cut.constant)) {
    throw std::runtime_error("cut has non-finite coefficients");
  }
  cut.source = source;
  cut.x = x;
  cut.lambda = lambda;
  cut.mu = mu;
  cut.y = y;
  return cut;
}

OptimalityCut build_cut(const MinlpInstance& inst, const BinaryAssignment& y,
                        const SubproblemSolution& solution) {
  return build_cut(inst, y, solution.x, solution.lambda, solution.mu, CutSource::Exact);
}

double evaluate_cut(const OptimalityCut& cut, const BinaryAssignment& y) {
  if (static_cast<std::size_t>(cut.coeff.size()) != y.size()) throw DimensionError("cut/y size mismatch");
  double v = cut.constant;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) v += cut.coeff[static_cast<Eigen::Index>(i)];
  }
  return v;
}

}  // namespace hgbd
