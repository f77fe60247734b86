#pragma once

#include <optional>
#include <set>

#include "hgbd/benders/cut.hpp"
#include "hgbd/benders/report.hpp"
#include "hgbd/nlp/ipm.hpp"

namespace hgbd {

enum class GapMode { Relative, Absolute };

struct GbdOptions {
  double tol = 1e-3;
  int max_iter = 30;
  GapMode gap_mode = GapMode::Relative;
  // When the running bound closes the gap, stop only if an exact master
  // value closes it too (solving the master once if this iteration did not).
  bool certify_termination = true;
  IpmOptions ipm;
};

/// UBD - LBD <= tol * max(1, |UBD|) (relative) or <= tol (absolute).
bool gap_closed(double ubd, double lbd, const GbdOptions& opt);

enum class Regime { Full, Partial, None };

/// What a master strategy proposes for the next iteration.
struct MasterDecision {
  BinaryAssignment y;
  double theta = kNegInf;  // LBD (exact master) or candidate value
  Regime regime = Regime::None;
  bool used_fallback_solver = false;
  int solver_calls = 0;
  double solver_ms = 0.0;  // time spent inside exact / partial master solves
};

/// Master-problem strategy: exact solve, or policy plus verification.
class MasterOracle {
 public:
  virtual ~MasterOracle() = default;
  virtual MasterDecision decide(const MinlpInstance& inst, const MasterState& master,
                                const BinaryAssignment& prev_y, double ubd,
                                const std::set<BinaryAssignment>& visited) = 0;
};

/// Result of evaluating the subproblem side at y.
struct SubproblemEvaluation {
  OptimalityCut cut;
  std::optional<double> ubd_candidate;
  Vector x;
  int nlp_iterations = 0;
  double surrogate_ms = 0.0;   // cut construction by a surrogate, if any
  bool exact_refresh = false;  // an exact NLP solve supplied the UBD value
};

/// Subproblem strategy: exact NLP or a learned surrogate.
class SubproblemOracle {
 public:
  virtual ~SubproblemOracle() = default;
  virtual SubproblemEvaluation evaluate(const MinlpInstance& inst, const BinaryAssignment& y) = 0;
};

class ExactMasterOracle final : public MasterOracle {
 public:
  MasterDecision decide(const MinlpInstance& inst, const MasterState& master,
                        const BinaryAssignment& prev_y, double ubd,
                        const std::set<BinaryAssignment>& visited) override;
};

/// Solves S(y) with the interior-point method; throws SubproblemFailure.
class ExactSubproblemOracle final : public SubproblemOracle {
 public:
  explicit ExactSubproblemOracle(IpmOptions options = {}) : solver_(options) {}
  SubproblemEvaluation evaluate(const MinlpInstance& inst, const BinaryAssignment& y) override;

 private:
  SubproblemSolver solver_;
};

/**
 * Decomposition loop shared by every variant.  Per iteration:
 * evaluate the subproblem side at y^k (UBD update, cut), ask the master
 * strategy for y^{k+1} and its bound value, update the monotone bound
 * max(bound, theta), stop once the gap closes or y^{k+1} was visited.
 * A gap closed by unverified candidates is confirmed against an exact
 * master value (see GbdOptions::certify_termination).
 * The first y is the lexicographically first feasible assignment.
 */
SolveReport run_gbd(const MinlpInstance& inst, MasterOracle& master_oracle,
                    SubproblemOracle& sub_oracle, const GbdOptions& options,
                    const std::string& variant);

SolveReport run_classical_gbd(const MinlpInstance& inst, const GbdOptions& options = {});

}  // namespace hgbd
