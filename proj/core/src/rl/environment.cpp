#include "hgbd/rl/environment.hpp"

#include <chrono>
#include <cmath>

#include "hgbd/rl/verify.hpp"

namespace hgbd::rl {

namespace {

using Clock = std::chrono::steady_clock;

double gap_of(double ubd, double clbd) {
  if (!std::isfinite(ubd) || !std::isfinite(clbd)) return kPosInf;
  return std::max(0.0, ubd - clbd);
}

}  // namespace

void GbdEnvironment::evaluate(const BinaryAssignment& y, double& t_sp) {
  const auto t0 = Clock::now();
  SubproblemSolution sol = solver_.solve(*inst_, y);
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  if (sol.status != SolveStatus::Optimal) {
    throw SubproblemFailure("subproblem failed at y=" + y.to_string(), y, sol.status);
  }
  t_sp = cfg_.time_proxy ? sol.iterations * cfg_.proxy_seconds_per_iteration : wall;
  visited_.insert(y);
  if (sol.Z < ubd_) {
    ubd_ = sol.Z;
    incumbent_ = y;
  }
  master_->add_cut(build_cut(*inst_, y, sol));
}

BipartiteGraph GbdEnvironment::reset(const MinlpInstance& inst) {
  cfg_.reward.validate();
  inst_ = &inst;
  master_ = std::make_unique<MasterState>(inst);
  if (master_->feasible().empty()) throw std::runtime_error("instance has no pure-binary feasible assignment");
  visited_.clear();
  ubd_ = kPosInf;
  clbd_ = kNegInf;
  steps_ = 0;
  done_ = false;
  y_ = master_->feasible().front();
  double t_sp = 0.0;
  evaluate(y_, t_sp);
  // Reference gap: the exact master's gap after the first cut.
  const MasterSolution ms = solve_master(*master_);
  delta0_ = gap_of(ubd_, ms.theta);
  delta_prev_ = delta0_;
  if (gap_closed(ubd_, ms.theta, cfg_.gbd)) done_ = true;
  return encode_master_graph(*master_, y_, ubd_scale(ubd_));
}

StepResult GbdEnvironment::step(const BinaryAssignment& action) {
  if (done_) throw std::logic_error("step() on a finished episode");
  if (action.size() != master_->m()) throw DimensionError("action has wrong length");
  StepResult r;
  ++steps_;
  r.action_feasible = master_->pure_feasible(action);

  BinaryAssignment next;
  double theta = kNegInf;
  if (r.action_feasible && !visited_.contains(action) && master_->theta(action) <= ubd_) {
    next = action;
    theta = master_->theta(action);
    r.accepted = true;
  } else {
    const MasterSolution ms = solve_master(*master_);
    if (ms.status != MasterStatus::Optimal) throw std::runtime_error("master problem infeasible");
    next = ms.y;
    theta = ms.theta;
  }
  clbd_ = update_clbd(clbd_, theta);
  const bool master_feasible = master_->pure_feasible(next);

  double t_sp = 0.0;
  if (visited_.contains(next)) {
    done_ = true;
  } else {
    evaluate(next, t_sp);
    y_ = next;
  }
  const double delta = gap_of(ubd_, clbd_);
  r.reward = compute_reward(r.action_feasible, delta_prev_, delta, delta0_, master_feasible, t_sp, cfg_.reward);
  delta_prev_ = delta;
  r.gap = delta;
  if (gap_closed(ubd_, clbd_, cfg_.gbd) || steps_ >= cfg_.episode_cap) done_ = true;
  r.done = done_;
  r.next_state = encode_master_graph(*master_, y_, ubd_scale(ubd_));
  return r;
}

MasterDecision RecordingMasterOracle::decide(const MinlpInstance& inst, const MasterState& master,
                                             const BinaryAssignment& prev_y, double ubd,
                                             const std::set<BinaryAssignment>& visited) {
  states_.push_back(encode_master_graph(master, prev_y, ubd_scale(ubd)));
  return exact_.decide(inst, master, prev_y, ubd, visited);
}

std::vector<LabeledState> build_bc_dataset(std::uint64_t first_seed, std::size_t count,
                                           const GbdOptions& options) {
  std::vector<LabeledState> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t seed = first_seed + k;
    const MinlpInstance inst = sample_instance(seed);
    RecordingMasterOracle rec;
    ExactSubproblemOracle sub(options.ipm);
    const SolveReport rep = run_gbd(inst, rec, sub, options, "classical");
    if (rep.status != "optimal") continue;
    for (auto& g : rec.states()) out.push_back({std::move(g), rep.y, seed});
  }
  return out;
}

}  // namespace hgbd::rl
