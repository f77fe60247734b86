#pragma once

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "hgbd/nlp/ipm.hpp"
#include "hgbd/problem/instance.hpp"

namespace hgbd {

enum class CutSource { Exact, Kinn };

/// O(y) = constant + coeff'y, cached from a primal-dual point (x^k, lambda_k, mu_k).
struct OptimalityCut {
  double constant = 0.0;
  Vector coeff;
  CutSource source = CutSource::Exact;
  Vector x;
  Vector lambda;
  Vector mu;  // full multiplier vector as supplied
  BinaryAssignment y;
};

/// Builds O_k(y) = f(x) + e'y + lambda'(h(x) + Ay) + mu_g'(g(x) + By).
/// Only the first q entries of `mu` (the g rows) contribute: bound rows have
/// no y-coupling and vanish at complementarity.
OptimalityCut build_cut(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x,
                        const Vector& lambda, const Vector& mu, CutSource source = CutSource::Exact);

OptimalityCut build_cut(const MinlpInstance& inst, const BinaryAssignment& y,
                        const SubproblemSolution& solution);

double evaluate_cut(const OptimalityCut& cut, const BinaryAssignment& y);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Cut set plus the pure-binary rows of the master problem.
class MasterState {
 public:
  explicit MasterState(const MinlpInstance& inst, std::size_t cap = kDefaultEnumerationCap);

  std::size_t m() const { return m_; }
  const Matrix& K() const { return K_; }
  const Vector& b() const { return b_; }
  const std::vector<bool>& equality() const { return equality_; }
  const std::vector<OptimalityCut>& cuts() const { return cuts_; }
  /// Pure-binary feasible assignments in lexicographic order.
  const std::vector<BinaryAssignment>& feasible() const { return feasible_; }

  void add_cut(OptimalityCut cut);
  bool pure_feasible(const BinaryAssignment& y, double tol = 1e-9) const;
  /// max_k O_k(y); -inf with no cuts.
  double theta(const BinaryAssignment& y) const;

 private:
  std::size_t m_;
  Matrix K_;
  Vector b_;
  std::vector<bool> equality_;
  std::vector<OptimalityCut> cuts_;
  std::vector<BinaryAssignment> feasible_;
};

enum class MasterStatus { Optimal, Infeasible };

struct MasterSolution {
  BinaryAssignment y;
  double theta = kNegInf;
  MasterStatus status = MasterStatus::Infeasible;
};

/// Exact minimization of max_k O_k(y) over the pure-binary feasible set by
/// enumeration; ties go to the lexicographically smallest y.
MasterSolution solve_master(const MasterState& master);

/// Same, restricted to assignments agreeing with `fixed` (index -> value).
MasterSolution solve_master_partial(const MasterState& master, const std::map<std::size_t, int>& fixed);

/// Depth-first branch and bound with bound
///   max_k (constant + sum_fixed coeff*y + sum_free min(0, coeff)),
/// used to cross-check the enumeration.
MasterSolution solve_master_branch_and_bound(const MasterState& master,
                                             const std::map<std::size_t, int>& fixed = {});

}  // namespace hgbd
