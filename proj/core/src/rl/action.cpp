#include "hgbd/rl/action.hpp"

#include <cmath>

#include "hgbd/nn/tape.hpp"

namespace hgbd::rl {

SampledAction sample_action(std::span<const double> p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampledAction a{BinaryAssignment(p.size()), 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw std::invalid_argument("probability outside [0,1]");
    a.y.set(i, u(rng) < p[i] ? 1 : 0);
  }
  a.log_prob = log_prob(p, a.y);
  return a;
}

double log_prob(std::span<const double> p, const BinaryAssignment& a) {
  if (p.size() != a.size()) throw DimensionError("probability / action length mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) lp += a[i] == 1 ? std::log(p[i]) : std::log1p(-p[i]);
  return lp;
}

double log_prob_from_logits(std::span<const double> z, const BinaryAssignment& a) {
  if (z.size() != a.size()) throw DimensionError("logit / action length mismatch");
  double lp = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) lp -= nn::softplus_value(a[i] == 1 ? -z[i] : z[i]);
  return lp;
}

void RewardConfig::validate() const {
  for (double v : {alpha1, alpha2, alpha3, beta1, beta2, tau}) {
    if (!(v >= 0.0)) throw std::invalid_argument("reward weights must be nonnegative");
  }
}

RewardTerms compute_reward(bool feasible, double delta_prev, double delta_curr, double delta_0,
                           bool master_feasible, double t_sp, const RewardConfig& cfg) {
  RewardTerms r;
  r.feas = feasible ? cfg.beta2 : -cfg.beta1;
  if (master_feasible && delta_0 > 0.0 && std::isfinite(delta_prev) && std::isfinite(delta_curr)) {
    r.gap = std::max(0.0, (delta_prev - delta_curr) / delta_0);
  }
  r.time = std::min(std::max(t_sp, 0.0), cfg.tau);
  r.total = cfg.alpha1 * r.feas + cfg.alpha2 * r.gap - cfg.alpha3 * r.time;
  return r;
}

}  // namespace hgbd::rl
