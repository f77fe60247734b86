#include "hgbd/kinn/train.hpp"

#include <chrono>
#include <cmath>

#include "hgbd/nn/adam.hpp"

namespace hgbd::kinn {

namespace {

void check_finite(const LossComponents& c, int epoch) {
  if (std::isfinite(c.total)) return;
  throw TrainingDiverged("surrogate loss not finite at epoch " + std::to_string(epoch) +
                         ": stationarity=" + std::to_string(c.stationarity) + " primal=" + std::to_string(c.primal) +
                         " complementarity=" + std::to_string(c.complementarity));
}

void check_training_set(const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y) {
  if (Y.empty()) throw std::invalid_argument("surrogate training set is empty");
  for (const auto& y : Y) {
    if (!pure_binary_feasible(inst, y)) {
      throw std::invalid_argument("training assignment " + y.to_string() + " violates the pure-binary rows");
    }
  }
}

}  // namespace

LossComponents evaluate_loss(KinnModel& model, const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y,
                             const KinnLossWeights& w) {
  nn::Tape t;
  const nn::Tensor yt = assignments_to_tensor(Y);
  KinnOutputs o = model.forward(t, t.constant(yt));
  return values(kkt_loss(t, inst, yt, o.x, o.mu, o.has_lambda ? &o.lambda : nullptr, w));
}

KinnTrainResult train_kinn(KinnModel& model, const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y,
                           const KinnTrainConfig& cfg,
                           const std::function<void(int, const LossComponents&)>& progress) {
  check_training_set(inst, Y);
  cfg.weights.validate();
  const nn::Tensor yt = assignments_to_tensor(Y);
  KinnTrainResult res;
  int epoch = 0;

  {
    nn::Adam opt(model.params(), {.lr = cfg.lr});
    for (int e = 0; e < cfg.epochs_phase1; ++e, ++epoch) {
      nn::Tape t;
      KinnOutputs o = model.forward(t, t.constant(yt));
      KinnLossTerms terms = kkt_loss(t, inst, yt, o.x, o.mu, o.has_lambda ? &o.lambda : nullptr, cfg.weights);
      const LossComponents c = values(terms);
      check_finite(c, epoch);
      res.trace.push_back(c);
      if (progress && cfg.log_every > 0 && epoch % cfg.log_every == 0) progress(epoch, c);
      opt.zero_grad();
      t.backward(terms.total);
      opt.step();
    }
  }
  res.phase1_epochs = epoch;

  if (cfg.epochs_phase2 > 0) {
    const nn::Tensor trunk_out = model.infer_trunk(yt);
    const nn::Tensor x_fixed = model.infer_primal(trunk_out);
    nn::Adam opt(model.dual_params(), {.lr = cfg.lr});
    for (int e = 0; e < cfg.epochs_phase2; ++e, ++epoch) {
      nn::Tape t;
      KinnOutputs o = model.heads(t, t.constant(trunk_out), false);
      nn::Var x = t.constant(x_fixed);
      KinnLossTerms terms = kkt_loss(t, inst, yt, x, o.mu, o.has_lambda ? &o.lambda : nullptr, cfg.weights);
      const LossComponents c = values(terms);
      check_finite(c, epoch);
      res.trace.push_back(c);
      if (progress && cfg.log_every > 0 && epoch % cfg.log_every == 0) progress(epoch, c);
      opt.zero_grad();
      t.backward(terms.total);
      opt.step();
    }
  }
  return res;
}

KinnFit fit_kinn(const MinlpInstance& inst, const std::vector<BinaryAssignment>& Y, const KinnConfig& arch,
                 const KinnTrainConfig& cfg, std::uint64_t base_seed, const RestartPolicy& restarts,
                 const std::function<void(int, const LossComponents&)>& progress) {
  if (restarts.max_attempts < 1) throw std::invalid_argument("need at least one training attempt");
  KinnTrainConfig phase1 = cfg;
  phase1.epochs_phase2 = 0;
  std::optional<KinnFit> best;
  KinnFit log;
  for (int a = 0; a < restarts.max_attempts; ++a) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(a);
    KinnFit attempt{KinnModel(inst, arch, seed), {}, {}, {}};
    attempt.result = train_kinn(attempt.model, inst, Y, phase1, progress);
    const double loss = attempt.result.trace.empty() ? evaluate_loss(attempt.model, inst, Y, cfg.weights).total
                                                     : attempt.result.trace.back().total;
    log.seeds_tried.push_back(seed);
    log.phase1_losses.push_back(loss);
    if (!best || loss < best->phase1_losses.back()) {
      attempt.phase1_losses = {loss};
      best = std::move(attempt);
    }
    if (loss <= restarts.accept_phase1_loss) break;
  }
  KinnFit out = std::move(*best);
  if (cfg.epochs_phase2 > 0) {
    KinnTrainConfig phase2 = cfg;
    phase2.epochs_phase1 = 0;
    KinnTrainResult r2 = train_kinn(out.model, inst, Y, phase2, progress);
    for (auto& c : r2.trace) out.result.trace.push_back(c);
  }
  out.seeds_tried = std::move(log.seeds_tried);
  out.phase1_losses = std::move(log.phase1_losses);
  return out;
}

double max_primal_violation(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x) {
  const ConstraintValues cv = evaluate_constraints(inst, x, y);
  double v = 0.0;
  for (Eigen::Index i = 0; i < cv.g.size(); ++i) v = std::max(v, cv.g[i]);
  for (Eigen::Index i = 0; i < cv.h.size(); ++i) v = std::max(v, std::abs(cv.h[i]));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    v = std::max(v, inst.lower()[j] - x[j]);
    if (std::isfinite(inst.upper()[j])) v = std::max(v, x[j] - inst.upper()[j]);
  }
  return v;
}

KinnCut predict_cut(const KinnModel& model, const MinlpInstance& inst, const BinaryAssignment& y, double feas_tol) {
  KinnCut out;
  out.point = model.predict(y);
  out.cut = build_cut(inst, y, out.point.x, out.point.lambda, out.point.mu, CutSource::Kinn);
  out.max_violation = max_primal_violation(inst, y, out.point.x);
  if (out.max_violation <= feas_tol) out.ubd_candidate = evaluate_objective(inst, out.point.x, y);
  return out;
}

SubproblemEvaluation KinnSubproblemOracle::evaluate(const MinlpInstance& inst, const BinaryAssignment& y) {
  const auto t0 = std::chrono::steady_clock::now();
  KinnCut kc = predict_cut(model_, inst, y, feas_tol_);
  SubproblemEvaluation ev;
  ev.surrogate_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  ev.x = kc.point.x;
  ev.ubd_candidate = kc.ubd_candidate;
  if (!ev.ubd_candidate && refresh_) {
    SubproblemSolution sol = solver_.solve(inst, y);
    ++refresh_calls_;
    ev.exact_refresh = true;
    if (sol.status != SolveStatus::Optimal) {
      throw SubproblemFailure("subproblem failed at y=" + y.to_string(), y, sol.status);
    }
    ev.ubd_candidate = sol.Z;
    ev.x = sol.x;
    ev.nlp_iterations = sol.iterations;
  }
  ev.cut = std::move(kc.cut);
  return ev;
}

}  // namespace hgbd::kinn
