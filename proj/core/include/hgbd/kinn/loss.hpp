#pragma once

#include <unordered_map>

#include "hgbd/kinn/kinn.hpp"

namespace hgbd::kinn {

/// Lowers expressions over x into tape ops on batch columns (each B x 1).
/// Shared subtrees are lowered once.
class ExprLowering {
 public:
  ExprLowering(nn::Tape& t, std::vector<nn::Var> x_columns);
  nn::Var lower(const Expr& e);

 private:
  nn::Var constant(double v);
  nn::Tape& t_;
  std::vector<nn::Var> x_;
  std::size_t batch_;
  std::unordered_map<const Expr::Node*, nn::Var> memo_;
};

struct KinnLossWeights {
  double alpha = 1.0;  // stationarity
  double beta = 1.0;   // primal feasibility
  double gamma = 1.0;  // complementarity
  double eps = 1e-3;   // smoothing of phi_eps
  void validate() const;
};

/// Batch means of the three terms; total = alpha*stat + beta*pri + gamma*comp.
struct KinnLossTerms {
  nn::Var total;
  nn::Var stationarity;
  nn::Var primal;
  nn::Var complementarity;
};

struct LossComponents {
  double total = 0.0;
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};

LossComponents values(const KinnLossTerms& t);

/**
 * Per sample:
 *   stat = || grad f + sum_i mu_i grad g_i - mu_lb + mu_ub + sum lambda grad h ||^2
 *   pri  = || max(0, g + By) ||^2 + || h + Ay ||^2
 *   comp = sum_i phi_eps(mu_i, s_i)^2 over g rows and bounds,
 *          slacks s = -(g + By), x - lower, upper - x.
 * y: B x m values, x: B x n, mu: B x (q + n + finite uppers), lambda: B x p.
 */
KinnLossTerms kkt_loss(nn::Tape& t, const MinlpInstance& inst, const nn::Tensor& y, nn::Var x, nn::Var mu,
                       const nn::Var* lambda, const KinnLossWeights& w);

/// Evaluates the loss at a single given primal-dual point.
LossComponents kkt_loss_at(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x,
                           const Vector& mu, const Vector& lambda, const KinnLossWeights& w = {});

}  // namespace hgbd::kinn
