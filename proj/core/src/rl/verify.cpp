#include "hgbd/rl/verify.hpp"

#include <chrono>
#include <map>

namespace hgbd::rl {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool seen(const std::set<BinaryAssignment>* visited, const BinaryAssignment& y) {
  return visited != nullptr && visited->contains(y);
}

void fallback(VerifiedDecision& d, const MasterState& master) {
  const auto t0 = Clock::now();
  const MasterSolution ms = solve_master(master);
  d.solver_ms += ms_since(t0);
  ++d.solver_calls;
  if (ms.status != MasterStatus::Optimal) throw std::runtime_error("master problem infeasible");
  d.y = ms.y;
  d.theta_candidate = ms.theta;
  d.accepted = false;
  d.used_fallback_solver = true;
}

}  // namespace

void Thresholds::validate() const {
  if (!(delta1 >= 0.0 && delta1 < delta2 && delta2 <= 1.0)) {
    throw std::invalid_argument("thresholds need 0 <= delta1 < delta2 <= 1");
  }
}

Regime classify(std::span<const double> p, const Thresholds& th) {
  std::size_t confident = 0;
  for (double v : p) confident += th.confident(v) ? 1 : 0;
  if (confident == p.size() && !p.empty()) return Regime::Full;
  if (confident > 0) return Regime::Partial;
  return Regime::None;
}

VerifiedDecision verify_and_assign(std::span<const double> p, const MasterState& master, double ubd,
                                   const Thresholds& th, const std::set<BinaryAssignment>* visited) {
  th.validate();
  if (p.size() != master.m()) throw DimensionError("policy output length differs from m");
  VerifiedDecision d;
  d.regime = classify(p, th);

  switch (d.regime) {
    case Regime::Full: {
      BinaryAssignment y(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) y.set(i, p[i] >= th.delta2 ? 1 : 0);
      if (master.pure_feasible(y) && !seen(visited, y)) {
        const double t = master.theta(y);
        if (t <= ubd) {
          d.y = y;
          d.theta_candidate = t;
          d.accepted = true;
          return d;
        }
      }
      fallback(d, master);
      return d;
    }
    case Regime::Partial: {
      std::map<std::size_t, int> fixed;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (th.confident(p[i])) fixed[i] = p[i] >= th.delta2 ? 1 : 0;
      }
      const auto t0 = Clock::now();
      const MasterSolution ms = solve_master_partial(master, fixed);
      d.solver_ms += ms_since(t0);
      ++d.solver_calls;
      if (ms.status == MasterStatus::Optimal && ms.theta <= ubd && !seen(visited, ms.y)) {
        d.y = ms.y;
        d.theta_candidate = ms.theta;
        d.accepted = true;
        return d;
      }
      fallback(d, master);
      return d;
    }
    case Regime::None:
      fallback(d, master);
      return d;
  }
  return d;
}

MasterDecision to_master_decision(const VerifiedDecision& v) {
  MasterDecision d;
  d.y = v.y;
  d.theta = v.theta_candidate;
  d.regime = v.regime;
  d.used_fallback_solver = v.used_fallback_solver;
  d.solver_calls = v.solver_calls;
  d.solver_ms = v.solver_ms;
  return d;
}

MasterDecision AgentMasterOracle::decide(const MinlpInstance&, const MasterState& master,
                                         const BinaryAssignment& prev_y, double ubd,
                                         const std::set<BinaryAssignment>& visited) {
  const BipartiteGraph g = encode_master_graph(master, prev_y, ubd_scale(ubd));
  const std::vector<double> p = actor_.probabilities(g);
  return to_master_decision(verify_and_assign(p, master, ubd, th_, &visited));
}

MasterDecision ConstantPolicyOracle::decide(const MinlpInstance&, const MasterState& master,
                                            const BinaryAssignment&, double ubd,
                                            const std::set<BinaryAssignment>& visited) {
  const std::vector<double> p(master.m(), p_);
  return to_master_decision(verify_and_assign(p, master, ubd, th_, &visited));
}

}  // namespace hgbd::rl
