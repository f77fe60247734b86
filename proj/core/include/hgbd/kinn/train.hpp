#pragma once

#include <functional>
#include <optional>

#include "hgbd/benders/gbd.hpp"
#include "hgbd/kinn/loss.hpp"

namespace hgbd::kinn {

struct KinnTrainConfig {
  int epochs_phase1 = 40000;
  int epochs_phase2 = 40000;
  double lr = 1e-4;
  KinnLossWeights weights;
  int log_every = 0;  // 0 disables the progress callback
};

struct KinnTrainResult {
  std::vector<LossComponents> trace;  // one entry per epoch, both phases
  int phase1_epochs = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Phase 1: full-batch Adam on the mean loss over Y, all parameters.
 * Phase 2: trunk and primal branch frozen, a fresh Adam on the dual
 * branches.  The frozen parts are evaluated once and enter as constants.
 * Throws TrainingDiverged on a non-finite loss.
 */
KinnTrainResult train_kinn(KinnModel& model, const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y,
                           const KinnTrainConfig& cfg,
                           const std::function<void(int epoch, const LossComponents&)>& progress = {});

struct RestartPolicy {
  int max_attempts = 6;
  double accept_phase1_loss = 1e-2;  // a phase-1 run ending above this is retried
};

struct KinnFit {
  KinnModel model;
  KinnTrainResult result;
  std::vector<std::uint64_t> seeds_tried;
  std::vector<double> phase1_losses;
};

/**
 * Trains from seeds base_seed, base_seed+1, ... until a phase-1 run ends
 * with training loss <= accept_phase1_loss, then runs phase 2 on it.  If
 * none qualifies, the lowest phase-1 loss is kept.  Only the self-supervised
 * training loss drives the choice.
 */
KinnFit fit_kinn(const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y, const KinnConfig& arch,
                 const KinnTrainConfig& cfg, std::uint64_t base_seed, const RestartPolicy& restarts = {},
                 const std::function<void(int epoch, const LossComponents&)>& progress = {});

/// Mean loss of the model over Y.
LossComponents evaluate_loss(KinnModel& model, const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y,
                             const KinnLossWeights& w = {});

struct KinnCut {
  OptimalityCut cut;
  std::optional<double> ubd_candidate;
  double max_violation = 0.0;
  KinnPoint point;
};

/// Largest primal violation max(0, g+By), |h+Ay|, bound violations.
double max_primal_violation(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x);

/// Cut from the predicted point; UBD candidate f(x)+e'y only when the
/// predicted x violates no constraint by more than feas_tol.
KinnCut predict_cut(const KinnModel& model, const MinlpInstance& inst, const BinaryAssignment& y, double feas_tol);

/**
 * Subproblem strategy backed by the surrogate.  With exact_ubd_refresh, an
 * iterate whose prediction fails the feasibility gate gets its UBD value
 * from an exact NLP solve (the cut still comes from the surrogate).
 */
class KinnSubproblemOracle final : public SubproblemOracle {
 public:
  KinnSubproblemOracle(const KinnModel& model, double feas_tol, bool exact_ubd_refresh = false,
                       IpmOptions ipm = {})
      : model_(model), feas_tol_(feas_tol), refresh_(exact_ubd_refresh), solver_(ipm) {}
  SubproblemEvaluation evaluate(const MinlpInstance& inst, const BinaryAssignment& y) override;
  int refresh_calls() const { return refresh_calls_; }

 private:
  const KinnModel& model_;
  double feas_tol_;
  bool refresh_;
  SubproblemSolver solver_;
  int refresh_calls_ = 0;
};

}  // namespace hgbd::kinn
