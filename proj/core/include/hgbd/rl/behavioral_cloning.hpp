#pragma once

#include <vector>

#include "hgbd/rl/actor_critic.hpp"
#include "hgbd/rl/environment.hpp"

namespace hgbd::rl {

struct BcConfig {
  int epochs = 40;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::uint64_t seed = 0;  // shuffling
};

struct BcResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch, empty without validation data
  int best_epoch = -1;             // epoch whose parameters were kept, -1 = initial
  double best_val_loss = 0.0;
};

/// Mean binary cross-entropy of sigmoid(logits) against the labels.
nn::Var bce_with_logits(nn::Var logits, const BinaryAssignment& label);
double bce_loss(Actor& actor, const std::vector<LabeledState>& data);

/**
 * Minimizes mean BCE with Adam over shuffled minibatches.  The returned
 * actor holds the parameters with the lowest validation loss (training loss
 * when `val` is empty), including the initial parameters.
 */
BcResult behavioral_clone(Actor& actor, const std::vector<LabeledState>& train,
                          const std::vector<LabeledState>& val, const BcConfig& cfg);

/// Fraction of states where rounding p at 0.5 reproduces the label exactly.
double exact_assignment_accuracy(Actor& actor, const std::vector<LabeledState>& data);

}  // namespace hgbd::rl
