#pragma once

#include <set>
#include <span>

#include "hgbd/benders/gbd.hpp"
#include "hgbd/rl/actor_critic.hpp"

namespace hgbd::rl {

struct Thresholds {
  double delta1 = 0.10;
  double delta2 = 0.90;
  void validate() const;
  bool confident(double p) const { return p <= delta1 || p >= delta2; }
};

/// Full if every p_i is confident, partial if some are, none otherwise.
Regime classify(std::span<const double> p, const Thresholds& th);

struct VerifiedDecision {
  Regime regime = Regime::None;
  BinaryAssignment y;
  double theta_candidate = kNegInf;
  bool accepted = false;  // the policy's assignment (full or partial) was kept
  bool used_fallback_solver = false;
  int solver_calls = 0;
  double solver_ms = 0.0;
};

/**
 * Confidence-based post-processing of the policy output.
 *
 * full:    threshold every entry; keep y_hat if it is pure-binary feasible
 *          and Theta_hat = max_k O_k(y_hat) <= ubd, else solve the master.
 * partial: fix the confident entries and solve the restricted master; keep
 *          it if feasible and its value <= ubd, else solve the full master.
 * none:    solve the master.
 *
 * When `visited` is given, an assignment already evaluated is also
 * rejected, so the loop never stops early on an unverified repeat.
 */
VerifiedDecision verify_and_assign(std::span<const double> p, const MasterState& master, double ubd,
                                   const Thresholds& th,
                                   const std::set<BinaryAssignment>* visited = nullptr);

/// max(prev, candidate); start from kNegInf.
inline double update_clbd(double clbd_prev, double theta_candidate) {
  return std::max(clbd_prev, theta_candidate);
}

/// Master strategy driven by a trained actor.
class AgentMasterOracle final : public MasterOracle {
 public:
  AgentMasterOracle(Actor& actor, Thresholds th) : actor_(actor), th_(th) {}
  MasterDecision decide(const MinlpInstance& inst, const MasterState& master, const BinaryAssignment& prev_y,
                        double ubd, const std::set<BinaryAssignment>& visited) override;

 private:
  Actor& actor_;
  Thresholds th_;
};

/// Constant-probability policy (p = 0.5 gives the untrained baseline).
class ConstantPolicyOracle final : public MasterOracle {
 public:
  ConstantPolicyOracle(double p, Thresholds th) : p_(p), th_(th) {}
  MasterDecision decide(const MinlpInstance& inst, const MasterState& master, const BinaryAssignment& prev_y,
                        double ubd, const std::set<BinaryAssignment>& visited) override;

 private:
  double p_;
  Thresholds th_;
};

MasterDecision to_master_decision(const VerifiedDecision& v);

}  // namespace hgbd::rl
