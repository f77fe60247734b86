#include <algorithm>
#include <cmath>

#include "hgbd/benders/cut.hpp"

namespace hgbd {

MasterState::MasterState(const MinlpInstance& inst, std::size_t cap)
    : m_(inst.m()),
      K_(inst.K()),
      b_(inst.b()),
      equality_(inst.equality()),
      feasible_(enumerate_feasible_assignments(inst, cap)) {}

void MasterState::add_cut(OptimalityCut cut) {
  if (static_cast<std::size_t>(cut.coeff.size()) != m_) throw DimensionError("cut dimension differs from m");
  cuts_.push_back(std::move(cut));
}

bool MasterState::pure_feasible(const BinaryAssignment& y, double tol) const {
  if (y.size() != m_) throw DimensionError("y has wrong length");
  const Vector r = K_ * y.to_vector() - b_;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (equality_[static_cast<std::size_t>(i)] ? std::abs(r[i]) > tol : r[i] > tol) return false;
  }
  return true;
}

double MasterState::theta(const BinaryAssignment& y) const {
  double t = kNegInf;
  for (const auto& cut : cuts_) t = std::max(t, evaluate_cut(cut, y));
  return t;
}

namespace {

bool consistent(const BinaryAssignment& y, const std::map<std::size_t, int>& fixed) {
  for (const auto& [i, v] : fixed) {
    if (y[i] != v) return false;
  }
  return true;
}

void check_fixed(const MasterState& master, const std::map<std::size_t, int>& fixed) {
  for (const auto& [i, v] : fixed) {
    if (i >= master.m() || (v != 0 && v != 1)) throw std::invalid_argument("invalid fixing");
  }
}

}  // namespace

MasterSolution solve_master_partial(const MasterState& master, const std::map<std::size_t, int>& fixed) {
  check_fixed(master, fixed);
  MasterSolution best;
  for (const auto& y : master.feasible()) {
    if (!consistent(y, fixed)) continue;
    const double t = master.theta(y);
    if (best.status == MasterStatus::Infeasible || t < best.theta) {
      best.y = y;
      best.theta = t;
      best.status = MasterStatus::Optimal;
    }
  }
  return best;
}

MasterSolution solve_master(const MasterState& master) { return solve_master_partial(master, {}); }

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const MasterState& master, const std::map<std::size_t, int>& fixed)
      : master_(master), fixed_(fixed), y_(master.m()) {}

  MasterSolution run() {
    dfs(0);
    return best_;
  }

 private:
  // Row activity range over completions of y_[0..depth).
  bool rows_feasible(std::size_t depth) const {
    const Matrix& K = master_.K();
    for (Eigen::Index r = 0; r < K.rows(); ++r) {
      double lo = 0.0, hi = 0.0;
      for (std::size_t i = 0; i < master_.m(); ++i) {
        const double k = K(r, static_cast<Eigen::Index>(i));
        if (i < depth) {
          lo += k * y_[i];
          hi += k * y_[i];
        } else {
          lo += std::min(0.0, k);
          hi += std::max(0.0, k);
        }
      }
      const double rhs = master_.b()[r];
      if (lo > rhs + 1e-9) return false;
      if (master_.equality()[static_cast<std::size_t>(r)] && hi < rhs - 1e-9) return false;
    }
    return true;
  }

  double bound(std::size_t depth) const {
    double t = kNegInf;
    for (const auto& cut : master_.cuts()) {
      double v = cut.constant;
      for (std::size_t i = 0; i < master_.m(); ++i) {
        const double c = cut.coeff[static_cast<Eigen::Index>(i)];
        v += i < depth ? c * y_[i] : std::min(0.0, c);
      }
      t = std::max(t, v);
    }
    return t;
  }

  void dfs(std::size_t depth) {
    if (!rows_feasible(depth)) return;
    if (best_.status == MasterStatus::Optimal && bound(depth) >= best_.theta) return;
    if (depth == master_.m()) {
      // Leaves are reached in lexicographic order, so strict improvement
      // keeps the lexicographically smallest minimizer.
      const double t = master_.theta(y_);
      if (best_.status == MasterStatus::Infeasible || t < best_.theta) {
        best_ = {y_, t, MasterStatus::Optimal};
      }
      return;
    }
    const auto it = fixed_.find(depth);
    for (int v = 0; v <= 1; ++v) {
      if (it != fixed_.end() && it->second != v) continue;
      y_.set(depth, v);
      dfs(depth + 1);
    }
    y_.set(depth, 0);
  }

  const MasterState& master_;
  const std::map<std::size_t, int>& fixed_;
  BinaryAssignment y_;
  MasterSolution best_;
};

}  // namespace

MasterSolution solve_master_branch_and_bound(const MasterState& master,
                                             const std::map<std::size_t, int>& fixed) {
  check_fixed(master, fixed);
  return BranchAndBound(master, fixed).run();
}

}  // namespace hgbd
