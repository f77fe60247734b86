#pragma once

#include <random>
#include <span>

#include "hgbd/problem/instance.hpp"

namespace hgbd::rl {

struct SampledAction {
  BinaryAssignment y;
  double log_prob = 0.0;
};

/// Independent Bernoulli(p_i) draws.
SampledAction sample_action(std::span<const double> p, std::mt19937_64& rng);

/// sum_i a_i ln p_i + (1 - a_i) ln(1 - p_i).
double log_prob(std::span<const double> p, const BinaryAssignment& a);

/// Same quantity from pre-sigmoid logits z: ln p = -softplus(-z), ln(1-p) = -softplus(z).
double log_prob_from_logits(std::span<const double> z, const BinaryAssignment& a);

/// r = a1 r_feas + a2 r_gap - a3 r_time.
struct RewardConfig {
  double alpha1 = 1.0;
  double alpha2 = 6.0;
  double alpha3 = 1.0;
  double beta1 = 0.5;
  double beta2 = 1.5;
  double tau = 1.0;

  void validate() const;
};

struct RewardTerms {
  double feas = 0.0;
  double gap = 0.0;
  double time = 0.0;
  double total = 0.0;
};

/// t_sp in seconds.  A nonpositive delta_0 gives r_gap = 0.
RewardTerms compute_reward(bool feasible, double delta_prev, double delta_curr, double delta_0,
                           bool master_feasible, double t_sp, const RewardConfig& cfg = {});

}  // namespace hgbd::rl
