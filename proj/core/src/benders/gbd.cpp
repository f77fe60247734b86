#include "hgbd/benders/gbd.hpp"

#include <chrono>
#include <cmath>

namespace hgbd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

bool gap_closed(double ubd, double lbd, const GbdOptions& opt) {
  if (!std::isfinite(ubd) || lbd == kNegInf) return false;
  const double gap = ubd - lbd;
  if (opt.gap_mode == GapMode::Absolute) return gap <= opt.tol;
  return gap <= opt.tol * std::max(1.0, std::abs(ubd));
}

MasterDecision ExactMasterOracle::decide(const MinlpInstance&, const MasterState& master,
                                         const BinaryAssignment&, double,
                                         const std::set<BinaryAssignment>&) {
  const auto t0 = Clock::now();
  const MasterSolution ms = solve_master(master);
  if (ms.status != MasterStatus::Optimal) throw std::runtime_error("master problem infeasible");
  MasterDecision d;
  d.y = ms.y;
  d.theta = ms.theta;
  d.regime = Regime::None;
  d.used_fallback_solver = true;
  d.solver_calls = 1;
  d.solver_ms = ms_since(t0);
  return d;
}

SubproblemEvaluation ExactSubproblemOracle::evaluate(const MinlpInstance& inst,
                                                     const BinaryAssignment& y) {
  SubproblemSolution sol = solver_.solve(inst, y);
  if (sol.status != SolveStatus::Optimal) {
    throw SubproblemFailure("subproblem failed at y=" + y.to_string() + " (" +
                                to_string(sol.status) + ")",
                            y, sol.status);
  }
  SubproblemEvaluation ev;
  ev.cut = build_cut(inst, y, sol);
  ev.ubd_candidate = sol.Z;
  ev.x = sol.x;
  ev.nlp_iterations = sol.iterations;
  return ev;
}

SolveReport run_gbd(const MinlpInstance& inst, MasterOracle& master_oracle,
                    SubproblemOracle& sub_oracle, const GbdOptions& options,
                    const std::string& variant) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto t_start = Clock::now();
  SolveReport rep;
  rep.variant = variant;
  rep.seed = inst.seed();
  rep.coefficients = inst.coefficients();

  MasterState master(inst);
  if (master.feasible().empty()) {
    rep.status = "failed";
    rep.message = "no pure-binary feasible assignment";
    return rep;
  }

  BinaryAssignment y = master.feasible().front();
  std::set<BinaryAssignment> visited;
  double ubd = kPosInf;
  double bound = kNegInf;
  bool have_incumbent = false;
  bool converged = false;

  for (int k = 1; k <= options.max_iter; ++k) {
    visited.insert(y);
    rep.visited.push_back(y);

    auto t0 = Clock::now();
    SubproblemEvaluation ev = sub_oracle.evaluate(inst, y);
    rep.t_sub_ms += ms_since(t0);
    ++rep.subproblem_calls;
    rep.nlp_iterations += ev.nlp_iterations;
    rep.t_surrogate_ms += ev.surrogate_ms;
    if (ev.exact_refresh) ++rep.exact_refresh_calls;
    if (ev.ubd_candidate && *ev.ubd_candidate < ubd) {
      ubd = *ev.ubd_candidate;
      rep.y = y;
      rep.x = ev.x;
      have_incumbent = true;
    }
    master.add_cut(std::move(ev.cut));

    t0 = Clock::now();
    MasterDecision d = master_oracle.decide(inst, master, y, ubd, visited);
    const double decide_ms = ms_since(t0);
    rep.t_master_ms += decide_ms;
    rep.t_verify_ms += std::max(0.0, decide_ms - d.solver_ms);
    rep.master_solver_calls += d.solver_calls;
    if (d.used_fallback_solver) ++rep.fallback_calls;
    switch (d.regime) {
      case Regime::Full:
        ++rep.regime_full;
        break;
      case Regime::Partial:
        ++rep.regime_partial;
        break;
      case Regime::None:
        ++rep.regime_none;
        break;
    }

    bound = std::max(bound, d.theta);
    rep.ubd_trace.push_back(ubd);
    rep.lbd_trace.push_back(bound);
    rep.iterations = k;

    if (visited.contains(d.y)) {
      converged = true;
      break;
    }
    if (gap_closed(ubd, bound, options)) {
      if (!options.certify_termination) {
        converged = true;
        break;
      }
      // The running bound may come from earlier unverified candidates, so
      // only an exact master value closing the gap ends the run.
      if (d.used_fallback_solver) {
        if (gap_closed(ubd, d.theta, options)) {
          converged = true;
          break;
        }
        y = d.y;
        continue;
      }
      t0 = Clock::now();
      const MasterSolution check = solve_master(master);
      rep.t_master_ms += ms_since(t0);
      ++rep.master_solver_calls;
      ++rep.fallback_calls;
      if (check.status != MasterStatus::Optimal) throw std::runtime_error("master problem infeasible");
      if (gap_closed(ubd, check.theta, options) || visited.contains(check.y)) {
        converged = true;
        break;
      }
      d.y = check.y;
    }
    y = d.y;
  }

  rep.t_total_ms = ms_since(t_start);
  if (!have_incumbent) {
    rep.status = "no-incumbent";
    rep.objective = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.objective = ubd;
    rep.status = converged ? "optimal" : "max-iter";
  }
  return rep;
}

SolveReport run_classical_gbd(const MinlpInstance& inst, const GbdOptions& options) {
  ExactMasterOracle master;
  ExactSubproblemOracle sub(options.ipm);
  return run_gbd(inst, master, sub, options, "classical");
}

}  // namespace hgbd
