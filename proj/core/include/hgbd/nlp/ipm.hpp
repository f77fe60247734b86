#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hgbd/problem/instance.hpp"

namespace hgbd {

enum class SolveStatus { Optimal, MaxIter, NumericalFailure };

std::string to_string(SolveStatus s);

/// Primal-dual solution of the subproblem S(y).
///
/// `mu` is ordered [g rows | lower bounds (all n) | finite upper bounds in
/// coordinate order]; see MinlpInstance::finite_upper().
struct SubproblemSolution {
  Vector x;
  Vector lambda;
  Vector mu;
  double Z = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  /// Merit value after every accepted Newton step, one barrier segment at a
  /// time (a new segment starts at every barrier decrease).
  std::vector<std::vector<double>> merit_trace;
};

struct IpmOptions {
  int max_iter = 200;
  double barrier_init = 1.0;
  double barrier_factor = 0.2;
  double barrier_min = 1e-13;
  double fraction_to_boundary = 0.995;
  double regularization = 1e-8;
  double regularization_growth = 10.0;
  int max_regularization_retries = 10;
  /// Barrier subproblem solved when its residual is below this times the barrier.
  double barrier_tol_factor = 10.0;
  /// Final KKT acceptance threshold (each residual norm).
  double tol = 1e-9;
  /// Inequalities are relaxed to c(x) <= relax internally so that problems
  /// whose feasible set has empty interior still admit a central path.
  double relax = 1e-12;
};

/**
 * Primal-dual interior-point solver for the convex subproblem
 *
 *   min_x f(x) + e'y  s.t.  h(x) + Ay = 0,  g(x) + By <= 0,  lower <= x <= upper.
 *
 * Inequalities get slacks; Newton steps are taken on the barrier-perturbed
 * KKT system with a fraction-to-boundary rule and a backtracking line
 * search on the squared residual norm.  One solve at a time per object.
 */
class SubproblemSolver {
 public:
  explicit SubproblemSolver(IpmOptions options = {}) : options_(options) {}
  SubproblemSolution solve(const MinlpInstance& inst, const BinaryAssignment& y);
  const IpmOptions& options() const { return options_; }

 private:
  IpmOptions options_;
};

SubproblemSolution solve_subproblem(const MinlpInstance& inst, const BinaryAssignment& y,
                                    const IpmOptions& options = {});

/// l2 norms of the three KKT residual blocks.
struct ResidualTriple {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
};

/// Bound multipliers enter stationarity as -e_j (lower) and +e_j (upper).
ResidualTriple kkt_residuals(const MinlpInstance& inst, const BinaryAssignment& y,
                             const Vector& x, const Vector& lambda, const Vector& mu);

/// Slack of every inequality in `mu` order: -(g+By), x-lower, upper-x.
Vector inequality_slacks(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x);

class SubproblemFailure : public std::runtime_error {
 public:
  SubproblemFailure(const std::string& what, BinaryAssignment y, SolveStatus status)
      : std::runtime_error(what), y_(std::move(y)), status_(status) {}
  const BinaryAssignment& assignment() const { return y_; }
  SolveStatus status() const { return status_; }

 private:
  BinaryAssignment y_;
  SolveStatus status_;
};

struct ReferenceSolution {
  BinaryAssignment y;
  Vector x;
  double Z = 0.0;
};

/// Enumerates every pure-binary feasible y and solves S(y); argmin with
/// lexicographic tie-breaking. Throws SubproblemFailure with the offending y.
ReferenceSolution reference_solve(const MinlpInstance& inst, const IpmOptions& options = {});

}  // namespace hgbd
