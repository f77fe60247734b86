#include "criteria.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hgbd/bench/accuracy.hpp"
#include "oracles.hpp"

namespace hgbd::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Tolerances and bands, fixed here.
constexpr double kRecoveryTol = 1e-4;
constexpr double kClassicalItersLo = 7.2;
constexpr double kClassicalItersHi = 11.2;
constexpr double kVariantItersSpread = 2.0;
constexpr double kSpeedRatio = 0.1;
constexpr double kStatBand = 5e-2;
constexpr double kPrimalBand = 5e-2;
constexpr double kCompBand = 5e-1;
constexpr double kCutTol = 1e-6;
constexpr double kNlpTol = 1e-6;
constexpr double kKktTol = 1e-8;
constexpr double kFdTol = 1e-4;
constexpr int kVerifyTrials = 100000;
constexpr double kMasterTol = 1e-9;
constexpr double kBcAccuracy = 0.6;
constexpr std::size_t kBcTestInstances = 200;
constexpr std::size_t kRewardWindow = 100;

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::vector<std::uint64_t> test_seeds() {
  std::vector<std::uint64_t> s(100);
  for (std::uint64_t i = 0; i < 100; ++i) s[i] = i;
  return s;
}

class Suite {
 public:
  explicit Suite(const SuiteOptions& o) : opt_(o) {}

  CriterionResult run(int id) {
    switch (id) {
      case 1: return optimality_recovery();
      case 2: return iteration_counts();
      case 3: return surrogate_speed();
      case 4: return kinn_quality();
      case 5: return cut_validity();
      case 6: return nlp_correctness();
      case 7: return gradient_integrity();
      case 8: return verification_properties();
      case 9: return master_exactness();
      case 10: return training_smoke();
      default: throw std::invalid_argument("no criterion " + std::to_string(id));
    }
  }

 private:
  void note(const std::string& s) {
    if (opt_.log) *opt_.log << "  .. " << s << std::endl;
  }

  // ---- shared trained models ----
  bench::BcRun& bc() {
    if (!bc_) {
      note("behavioral cloning on " + std::to_string(opt_.budget.bc_instances) + " instances");
      const auto t0 = Clock::now();
      bc_ = bench::train_bc(opt_.budget, {}, opt_.seed);
      note("  done in " + fmt(seconds_since(t0), 3) + " s, best epoch " + std::to_string(bc_->result.best_epoch));
    }
    return *bc_;
  }

  rl::EnvConfig env() const {
    rl::EnvConfig e;
    e.time_proxy = true;
    return e;
  }

  rl::Actor& agent() {
    if (!agent_) {
      agent_ = bc().actor;
      note("PPO fine-tuning for " + std::to_string(opt_.budget.ppo_episodes) + " episodes");
      const auto t0 = Clock::now();
      finetune_ = bench::train_ppo(*agent_, opt_.budget, opt_.seed + 7, env());
      note("  done in " + fmt(seconds_since(t0), 3) + " s");
    }
    return *agent_;
  }

  kinn::KinnFit& surrogate() {
    if (!kinn_) {
      note("surrogate training, " + std::to_string(opt_.budget.kinn_epochs_phase1) + " + " +
           std::to_string(opt_.budget.kinn_epochs_phase2) + " epochs");
      const auto t0 = Clock::now();
      kinn_ = bench::train_case_study_kinn(opt_.budget, opt_.seed);
      std::string tried;
      for (std::size_t i = 0; i < kinn_->seeds_tried.size(); ++i) {
        tried += (i ? ", " : "") + std::to_string(kinn_->seeds_tried[i]) + ":" + fmt(kinn_->phase1_losses[i], 3);
      }
      note("  done in " + fmt(seconds_since(t0), 3) + " s; phase-1 attempts (seed:loss) " + tried);
    }
    return *kinn_;
  }

  bench::BenchmarkTable& table() {
    if (!table_) {
      bench::Models m;
      m.actor = &agent();
      m.kinn = &surrogate().model;
      bench::BenchmarkConfig cfg;
      cfg.recovery_tol = kRecoveryTol;
      note("benchmark of all variants on seeds 0-99");
      table_ = bench::benchmark(test_seeds(), bench::all_variants(), m, cfg);
      if (opt_.artifacts) bench::write_benchmark(*opt_.artifacts / "benchmark", *table_);
    }
    return *table_;
  }

  // ---- criteria ----
  CriterionResult optimality_recovery() {
    CriterionResult r{1, "optimality recovery", false, "", 0};
    const auto& t = table();
    bool ok = true;
    std::ostringstream os;
    for (const auto& row : t.rows) {
      os << bench::to_string(row.variant) << " " << row.recovered << "/" << row.runs << "  ";
      ok = ok && row.failures == 0 && row.recovered == row.runs && row.runs == 100;
    }
    r.pass = ok;
    r.detail = os.str() + "(tol " + fmt(kRecoveryTol) + " relative)";
    return r;
  }

  CriterionResult iteration_counts() {
    CriterionResult r{2, "iteration counts", false, "", 0};
    const auto& t = table();
    double lo = kPosInf, hi = kNegInf, classical = 0.0;
    std::ostringstream os;
    for (const auto& row : t.rows) {
      os << bench::to_string(row.variant) << " " << fmt(row.iterations.mean) << "  ";
      lo = std::min(lo, row.iterations.mean);
      hi = std::max(hi, row.iterations.mean);
      if (row.variant == bench::Variant::Classical) classical = row.iterations.mean;
    }
    r.pass = classical >= kClassicalItersLo && classical <= kClassicalItersHi && hi - lo <= kVariantItersSpread;
    r.detail = os.str() + "spread " + fmt(hi - lo) + " (classical band [" + fmt(kClassicalItersLo) + ", " +
               fmt(kClassicalItersHi) + "], spread <= " + fmt(kVariantItersSpread) + ")";
    return r;
  }

  CriterionResult surrogate_speed() {
    CriterionResult r{3, "surrogate speed", false, "", 0};
    const auto& model = surrogate().model;
    const MinlpInstance inst = sample_instance(0);
    const auto ys = enumerate_feasible_assignments(inst);
    SubproblemSolver solver;
    double t_kinn = 0.0, t_nlp = 0.0;
    int calls = 0;
    double sink = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      for (const auto& y : ys) {
        auto t0 = Clock::now();
        const auto kc = kinn::predict_cut(model, inst, y, 1e-4);
        t_kinn += seconds_since(t0);
        t0 = Clock::now();
        const auto s = solver.solve(inst, y);
        t_nlp += seconds_since(t0);
        sink += kc.cut.constant + s.Z;
        ++calls;
      }
    }
    const double a = 1e3 * t_kinn / calls;
    const double b = 1e3 * t_nlp / calls;
    r.pass = std::isfinite(sink) && a <= kSpeedRatio * b;
    r.detail = "surrogate " + fmt(a * 1e3) + " us/call, exact " + fmt(b * 1e3) + " us/call, ratio " + fmt(a / b) +
               " (<= " + fmt(kSpeedRatio) + ")";
    return r;
  }

  CriterionResult kinn_quality() {
    CriterionResult r{4, "surrogate residual quality", false, "", 0};
    const auto& model = surrogate().model;
    const MinlpInstance inst = sample_instance(0);
    const auto row = bench::accuracy_row(inst, enumerate_feasible_assignments(inst),
                                         [&](const BinaryAssignment& y) { return model.predict(y); }, "all");
    const double st = row.stationarity.mean, pr = row.primal_feasibility.mean, cp = row.complementarity.mean;
    r.pass = st <= kStatBand && pr <= kPrimalBand && cp <= kCompBand && cp > st && cp > pr;
    r.detail = "means over " + std::to_string(row.points) + " assignments: stationarity " + fmt(st) + ", primal " +
               fmt(pr) + ", complementarity " + fmt(cp) + "; nrmse x " + fmt(row.nrmse_primal) + ", duals " +
               fmt(row.nrmse_dual);
    if (opt_.artifacts) {
      std::filesystem::create_directories(*opt_.artifacts);
      std::ofstream(*opt_.artifacts / "kinn_accuracy.json")
          << bench::accuracy_json(bench::kinn_accuracy_report(model, test_seeds(), {})).dump(1) << "\n";
    }
    return r;
  }

  CriterionResult cut_validity() {
    CriterionResult r{5, "cut validity", false, "", 0};
    std::mt19937_64 rng(opt_.seed + 55);
    double worst_over = kNegInf, worst_tight = 0.0;
    int checks = 0;
    for (int k = 0; k < 20; ++k) {
      const MinlpInstance inst = sample_instance(rng() % 1000000 + 10000);
      const auto ys = enumerate_feasible_assignments(inst);
      std::vector<double> Z;
      std::vector<OptimalityCut> cuts;
      for (const auto& y : ys) {
        const auto s = solve_subproblem(inst, y);
        if (s.status != SolveStatus::Optimal) throw std::runtime_error("subproblem failed in cut check");
        Z.push_back(s.Z);
        cuts.push_back(build_cut(inst, y, s));
      }
      for (std::size_t a = 0; a < ys.size(); ++a) {
        worst_tight = std::max(worst_tight, std::abs(evaluate_cut(cuts[a], ys[a]) - Z[a]));
        for (std::size_t b = 0; b < ys.size(); ++b) {
          worst_over = std::max(worst_over, evaluate_cut(cuts[a], ys[b]) - Z[b]);
          ++checks;
        }
      }
    }
    r.pass = worst_over <= kCutTol && worst_tight <= kCutTol;
    r.detail = std::to_string(checks) + " cut evaluations: max O_k(y)-Z(y) " + fmt(worst_over) +
               ", max |O_k(y^k)-Z(y^k)| " + fmt(worst_tight) + " (tol " + fmt(kCutTol) + ")";
    return r;
  }

  CriterionResult nlp_correctness() {
    CriterionResult r{6, "NLP solver correctness", false, "", 0};
    // y = (1,0,0,0,0): x* = (2,0,0,0,0,0), objective c1 + 121 + e^2.
    const CaseStudyCoefficients c{7, 3, 11, 5, 2};
    const MinlpInstance inst = build_case_study(c);
    BinaryAssignment y1(5);
    y1.set(0, 1);
    const auto s1 = solve_subproblem(inst, y1);
    Vector xs = Vector::Zero(6);
    xs[0] = 2.0;
    const double closed = c[0] + 121.0 + std::exp(2.0);
    const double e_closed = std::abs(s1.Z - closed);
    const double e_x = (s1.x - xs).cwiseAbs().maxCoeff();

    double worst_oracle = 0.0, worst_kkt = 0.0;
    int optimal = 0;
    const auto ys = enumerate_feasible_assignments(inst);
    for (const auto& y : ys) {
      const auto s = solve_subproblem(inst, y);
      if (s.status != SolveStatus::Optimal) continue;
      ++optimal;
      const auto b = testing::grid_polish_case_study(inst, y);
      worst_oracle = std::max(worst_oracle, std::abs(s.Z - b.Z));
      const auto k = kkt_residuals(inst, y, s.x, s.lambda, s.mu);
      worst_kkt = std::max({worst_kkt, k.stationarity, k.primal_feasibility, k.complementarity});
    }
    r.pass = s1.status == SolveStatus::Optimal && e_closed <= kNlpTol && e_x <= kNlpTol &&
             optimal == static_cast<int>(ys.size()) && ys.size() == 12 && worst_oracle <= kNlpTol &&
             worst_kkt <= kKktTol;
    r.detail = "closed form c1+121+e^2 error " + fmt(e_closed) + ", x error " + fmt(e_x) + "; " +
               std::to_string(optimal) + "/" + std::to_string(ys.size()) + " optimal, max |Z-oracle| " +
               fmt(worst_oracle) + ", max KKT residual " + fmt(worst_kkt);
    return r;
  }

  CriterionResult gradient_integrity() {
    CriterionResult r{7, "gradient integrity", false, "", 0};
    rl::PolicyConfig small;
    small.ecc_width = 6;
    small.filter_hidden = 3;
    small.dense_width = 5;
    const MinlpInstance inst = sample_instance(3);
    MasterState master(inst);
    for (const auto& y : {master.feasible()[0], master.feasible()[5], master.feasible()[9]}) {
      master.add_cut(build_cut(inst, y, solve_subproblem(inst, y)));
    }
    const auto g = rl::encode_master_graph(master, master.feasible()[9], rl::ubd_scale(150.0));
    const std::vector<double> w = {0.3, -1.1, 0.7, 0.2, -0.5};

    rl::Actor actor(small, 11);
    auto actor_loss = [&](bool grad) {
      nn::Tape t;
      nn::Var p = actor.forward(t, g);
      nn::Var l = nn::sum(nn::mul(p, t.constant(nn::Tensor(1, 5, w))));
      if (grad) {
        nn::zero_grads(actor.params());
        t.backward(l);
      }
      return l.value().item();
    };
    const double e_actor = testing::finite_difference_error(
        actor.params(), [&] { return actor_loss(false); }, [&] { actor_loss(true); });

    rl::Critic critic(small, 12);
    auto critic_loss = [&](bool grad) {
      nn::Tape t;
      nn::Var v = nn::square(critic.forward(t, g));
      if (grad) {
        nn::zero_grads(critic.params());
        t.backward(v);
      }
      return v.value().item();
    };
    const double e_critic = testing::finite_difference_error(
        critic.params(), [&] { return critic_loss(false); }, [&] { critic_loss(true); });

    kinn::KinnModel km(inst, {8, 6}, 13);
    const auto ys = enumerate_feasible_assignments(inst);
    const nn::Tensor yt = kinn::assignments_to_tensor(ys);
    auto kinn_loss = [&](bool grad) {
      nn::Tape t;
      auto o = km.forward(t, t.constant(yt));
      auto terms = kinn::kkt_loss(t, inst, yt, o.x, o.mu, nullptr, {});
      if (grad) {
        nn::zero_grads(km.params());
        t.backward(terms.total);
      }
      return terms.total.value().item();
    };
    const double e_kinn = testing::finite_difference_error(
        km.params(), [&] { return kinn_loss(false); }, [&] { kinn_loss(true); });

    r.pass = e_actor <= kFdTol && e_critic <= kFdTol && e_kinn <= kFdTol;
    r.detail = "worst relative error: actor " + fmt(e_actor) + ", critic " + fmt(e_critic) + ", surrogate loss " +
               fmt(e_kinn) + " (<= " + fmt(kFdTol) + ")";
    return r;
  }

  CriterionResult verification_properties() {
    CriterionResult r{8, "verification properties", false, "", 0};
    std::mt19937_64 rng(opt_.seed + 88);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Cut pools from exact solves on a few instances.
    std::vector<MinlpInstance> insts;
    std::vector<std::vector<OptimalityCut>> pools;
    for (std::uint64_t s = 0; s < 8; ++s) {
      insts.push_back(sample_instance(20000 + s));
      std::vector<OptimalityCut> pool;
      for (const auto& y : enumerate_feasible_assignments(insts.back())) {
        pool.push_back(build_cut(insts.back(), y, solve_subproblem(insts.back(), y)));
      }
      pools.push_back(std::move(pool));
    }
    const rl::Thresholds th;
    int infeasible = 0, over_ubd = 0, wrong_regime = 0, wrong_fix = 0;
    std::map<Regime, int> seen;
    for (int trial = 0; trial < kVerifyTrials; ++trial) {
      const std::size_t k = rng() % insts.size();
      MasterState master(insts[k]);
      const std::size_t ncut = 1 + rng() % pools[k].size();
      std::vector<std::size_t> idx(pools[k].size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < ncut; ++i) master.add_cut(pools[k][idx[i]]);
      std::vector<double> p(5);
      for (double& v : p) {
        const double u = unit(rng);
        v = u < 0.35 ? 0.1 * unit(rng) : (u < 0.7 ? 0.9 + 0.1 * unit(rng) : unit(rng));
      }
      const double t_lo = solve_master(master).theta;
      const double ubd = unit(rng) < 0.1 ? kPosInf : t_lo + (unit(rng) * 1.4 - 0.2) * 60.0;
      std::set<BinaryAssignment> visited;
      for (std::size_t i = 0; i < ncut; ++i)
        if (unit(rng) < 0.5) visited.insert(pools[k][idx[i]].y);
      const auto d = rl::verify_and_assign(p, master, ubd, th, unit(rng) < 0.5 ? &visited : nullptr);

      // independent regime count
      int confident = 0;
      for (double v : p) confident += (v <= th.delta1 || v >= th.delta2) ? 1 : 0;
      const Regime expect = confident == 5 ? Regime::Full : (confident > 0 ? Regime::Partial : Regime::None);
      if (d.regime != expect) ++wrong_regime;
      ++seen[d.regime];
      if (!pure_binary_feasible(insts[k], d.y)) ++infeasible;
      if (d.accepted && !(d.theta_candidate <= ubd)) ++over_ubd;
      if (d.accepted) {
        for (std::size_t i = 0; i < 5; ++i) {
          if (p[i] <= th.delta1 && d.y[i] != 0) ++wrong_fix;
          if (p[i] >= th.delta2 && d.y[i] != 1) ++wrong_fix;
        }
      }
    }
    // bound traces of every benchmark run
    int non_monotone = 0;
    for (const auto& run : table().runs) {
      for (std::size_t i = 1; i < run.lbd_trace.size(); ++i)
        if (run.lbd_trace[i] < run.lbd_trace[i - 1]) ++non_monotone;
      for (std::size_t i = 1; i < run.ubd_trace.size(); ++i)
        if (run.ubd_trace[i] > run.ubd_trace[i - 1]) ++non_monotone;
    }
    r.pass = infeasible == 0 && over_ubd == 0 && wrong_regime == 0 && wrong_fix == 0 && non_monotone == 0 &&
             seen[Regime::Full] > 0 && seen[Regime::Partial] > 0 && seen[Regime::None] > 0;
    r.detail = std::to_string(kVerifyTrials) + " trials (full " + std::to_string(seen[Regime::Full]) + ", partial " +
               std::to_string(seen[Regime::Partial]) + ", none " + std::to_string(seen[Regime::None]) +
               "): infeasible " + std::to_string(infeasible) + ", accepted above UBD " + std::to_string(over_ubd) +
               ", regime mismatches " + std::to_string(wrong_regime) + ", confident entries flipped " +
               std::to_string(wrong_fix) + "; non-monotone bound steps " + std::to_string(non_monotone) + " over " +
               std::to_string(table().runs.size()) + " runs";
    return r;
  }

  CriterionResult master_exactness() {
    CriterionResult r{9, "master solver exactness", false, "", 0};
    std::mt19937_64 rng(opt_.seed + 99);
    std::normal_distribution<double> nd(0.0, 20.0);
    const MinlpInstance inst = sample_instance(1);
    double worst = 0.0;
    int mismatched_y = 0;
    for (int trial = 0; trial < 100; ++trial) {
      MasterState master(inst);
      const int ncut = 1 + static_cast<int>(rng() % 15);
      for (int c = 0; c < ncut; ++c) {
        OptimalityCut cut;
        cut.constant = 100.0 + nd(rng);
        cut.coeff = Vector(5);
        for (int i = 0; i < 5; ++i) cut.coeff[i] = nd(rng);
        cut.y = master.feasible()[rng() % master.feasible().size()];
        master.add_cut(cut);
      }
      const auto a = solve_master(master);
      const auto b = solve_master_branch_and_bound(master);
      worst = std::max(worst, std::abs(a.theta - b.theta));
      if (!(a.y == b.y)) ++mismatched_y;
    }
    r.pass = worst <= kMasterTol;
    r.detail = "100 random cut sets: max |enumeration - branch and bound| " + fmt(worst) + " (<= " + fmt(kMasterTol) +
               "), differing argmin (ties) " + std::to_string(mismatched_y);
    return r;
  }

  CriterionResult training_smoke() {
    CriterionResult r{10, "training smoke tests", false, "", 0};
    // behavioral cloning, held-out accuracy
    auto& run = bc();
    const auto test = rl::build_bc_dataset(bench::kBcTestSeed, kBcTestInstances);
    const double acc = rl::exact_assignment_accuracy(run.actor, test);

    // PPO from scratch
    note("PPO from scratch for " + std::to_string(opt_.budget.ppo_episodes) + " episodes");
    rl::Actor fresh({}, opt_.seed + 21);
    const auto ppo = bench::train_ppo(fresh, opt_.budget, opt_.seed + 23, env());
    const auto [first, last] = rl::reward_window_means(ppo.curve, kRewardWindow);
    if (opt_.artifacts) {
      std::filesystem::create_directories(*opt_.artifacts);
      rl::write_learning_curve_csv(*opt_.artifacts / "ppo_scratch_curve.csv", ppo.curve);
      if (finetune_) rl::write_learning_curve_csv(*opt_.artifacts / "ppo_finetune_curve.csv", finetune_->curve);
    }

    // fallback rate: trained agent against p = 0.5
    double trained_rate = 0.0;
    for (const auto& row : table().rows)
      if (row.variant == bench::Variant::AgentOnly) trained_rate = row.fallback_rate;
    double fb = 0.0, it = 0.0;
    for (std::uint64_t s : test_seeds()) {
      const MinlpInstance inst = sample_instance(s);
      rl::ConstantPolicyOracle half(0.5, {});
      ExactSubproblemOracle sub;
      const auto rep = run_gbd(inst, half, sub, {}, "p=0.5");
      fb += rep.fallback_calls;
      it += rep.iterations;
    }
    const double untrained_rate = fb / it;

    r.pass = acc >= kBcAccuracy && last > first && trained_rate < untrained_rate;
    r.detail = "held-out exact-assignment accuracy " + fmt(acc) + " on " + std::to_string(test.size()) +
               " states from " + std::to_string(kBcTestInstances) + " instances (>= " + fmt(kBcAccuracy) +
               "); PPO reward first/last " + std::to_string(kRewardWindow) + " episodes " + fmt(first) + " -> " +
               fmt(last) + "; fallback rate trained " + fmt(trained_rate) + " vs p=0.5 " + fmt(untrained_rate);
    return r;
  }

  SuiteOptions opt_;
  std::optional<bench::BcRun> bc_;
  std::optional<rl::Actor> agent_;
  std::optional<rl::PpoResult> finetune_;
  std::optional<kinn::KinnFit> kinn_;
  std::optional<bench::BenchmarkTable> table_;
};

}  // namespace

std::vector<CriterionResult> run_suite(const SuiteOptions& opt,
                                       const std::function<void(const CriterionResult&)>& on_result) {
  Suite suite(opt);
  std::vector<int> ids = opt.only;
  if (ids.empty())
    for (int i = 1; i <= 10; ++i) ids.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = suite.run(id);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.name << ": " << r.detail << "  ["
     << std::fixed << std::setprecision(1) << r.seconds << " s]";
  return os.str();
}

}  // namespace hgbd::acceptance
