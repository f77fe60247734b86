#pragma once

#include <memory>
#include <set>

#include "hgbd/benders/gbd.hpp"
#include "hgbd/rl/action.hpp"
#include "hgbd/rl/graph.hpp"

namespace hgbd::rl {

struct EnvConfig {
  GbdOptions gbd;
  RewardConfig reward;
  int episode_cap = 30;
  // r_time from NLP iterations x proxy_seconds_per_iteration instead of wall time.
  bool time_proxy = false;
  double proxy_seconds_per_iteration = 1e-3;
};

struct StepResult {
  BipartiteGraph next_state;
  RewardTerms reward;
  bool done = false;
  bool action_feasible = false;
  bool accepted = false;  // the sampled action became the next iterate
  double gap = 0.0;       // max(0, UBD - CLBD) after the step
};

/**
 * One GBD run as an episode.  The state is the master graph after the
 * latest cut.  The action is a sampled assignment.  It becomes the next
 * iterate if it is pure-binary feasible, unvisited, and its candidate
 * value max_k O_k(a) is at most UBD.  Otherwise the exact master decides.
 * The reward then follows from that choice.
 */
class GbdEnvironment {
 public:
  explicit GbdEnvironment(EnvConfig cfg = {}) : cfg_(std::move(cfg)), solver_(cfg_.gbd.ipm) {}

  /// Returns the first state; done() may already be true.
  BipartiteGraph reset(const MinlpInstance& inst);
  StepResult step(const BinaryAssignment& action);

  bool done() const { return done_; }
  int steps() const { return steps_; }
  double ubd() const { return ubd_; }
  double clbd() const { return clbd_; }
  double delta0() const { return delta0_; }
  const BinaryAssignment& incumbent() const { return incumbent_; }
  const MasterState& master() const { return *master_; }

 private:
  void evaluate(const BinaryAssignment& y, double& t_sp);

  EnvConfig cfg_;
  SubproblemSolver solver_;
  const MinlpInstance* inst_ = nullptr;
  std::unique_ptr<MasterState> master_;
  std::set<BinaryAssignment> visited_;
  BinaryAssignment y_;
  BinaryAssignment incumbent_;
  double ubd_ = kPosInf;
  double clbd_ = kNegInf;
  double delta0_ = 0.0;
  double delta_prev_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
};

/// Wraps the exact master and records every state it is asked about.
class RecordingMasterOracle final : public MasterOracle {
 public:
  MasterDecision decide(const MinlpInstance& inst, const MasterState& master, const BinaryAssignment& prev_y,
                        double ubd, const std::set<BinaryAssignment>& visited) override;
  std::vector<BipartiteGraph>& states() { return states_; }

 private:
  ExactMasterOracle exact_;
  std::vector<BipartiteGraph> states_;
};

struct LabeledState {
  BipartiteGraph graph;
  BinaryAssignment label;
  std::uint64_t seed = 0;
};

/// Every master state on the classical trace of each seed, labeled with
/// that instance's optimal assignment.
std::vector<LabeledState> build_bc_dataset(std::uint64_t first_seed, std::size_t count,
                                           const GbdOptions& options = {});

}  // namespace hgbd::rl
