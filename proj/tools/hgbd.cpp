// hgbd: instance generation, training, solving and benchmark reports.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "criteria.hpp"
#include "hgbd/bench/accuracy.hpp"
#include "hgbd/bench/pipeline.hpp"
#include "hgbd/nn/checkpoint.hpp"

namespace {

using namespace hgbd;
using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  double tol = 1e-3;
  int max_iter = 30;
  double delta1 = 0.10;
  double delta2 = 0.90;
  double feas_tol = 1e-4;
  bool paper_scale = false;
  bool time_proxy = false;
  std::string gap_mode = "relative";
  bool no_ubd_refresh = false;

  GbdOptions gbd() const {
    GbdOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.gap_mode = gap_mode == "absolute" ? GapMode::Absolute : GapMode::Relative;
    return o;
  }
  bench::VariantConfig variant() const {
    bench::VariantConfig v;
    v.gbd = gbd();
    v.thresholds = {delta1, delta2};
    v.feas_tol = feas_tol;
    v.exact_ubd_refresh = !no_ubd_refresh;
    return v;
  }
  bench::TrainingBudget budget() const {
    return paper_scale ? bench::TrainingBudget::paper_scale() : bench::TrainingBudget::desk();
  }
  rl::EnvConfig env() const {
    rl::EnvConfig e;
    e.gbd = gbd();
    e.time_proxy = time_proxy;
    return e;
  }
};

class CliError : public std::runtime_error {
 public:
  CliError(std::string kind, const std::string& msg) : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// "a..b" (inclusive) or comma-separated values.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  try {
    if (auto dots = s.find(".."); dots != std::string::npos) {
      const auto a = std::stoull(s.substr(0, dots));
      const auto b = std::stoull(s.substr(dots + 2));
      if (b < a) throw CliError("invalid-argument", "empty seed range " + s);
      for (auto v = a; v <= b; ++v) out.push_back(v);
    } else {
      std::stringstream ss(s);
      for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoull(tok));
    }
  } catch (const std::logic_error&) {
    throw CliError("invalid-argument", "cannot parse seeds '" + s + "' (use a..b or a,b,c)");
  }
  if (out.empty()) throw CliError("invalid-argument", "no seeds given");
  return out;
}

std::vector<bench::Variant> parse_variants(const std::string& s) {
  if (s == "all") return bench::all_variants();
  std::vector<bench::Variant> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(bench::variant_from_string(tok));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw CliError("io", "cannot write " + path);
  f << text;
}

MinlpInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CliError("io", "cannot read " + path);
  return instance_from_json(json::parse(f));
}

struct LoadedModels {
  std::optional<rl::Actor> actor;
  std::optional<kinn::KinnModel> kinn;
  bench::Models view() {
    bench::Models m;
    if (actor) m.actor = &*actor;
    if (kinn) m.kinn = &*kinn;
    return m;
  }
};

LoadedModels load_models(const std::string& actor_path, const std::string& kinn_path) {
  LoadedModels m;
  if (!actor_path.empty()) m.actor = rl::load_actor(actor_path);
  if (!kinn_path.empty()) m.kinn = kinn::load_kinn(kinn_path, sample_instance(0));
  return m;
}

void require_models(const std::vector<bench::Variant>& vs, const LoadedModels& m) {
  for (auto v : vs) {
    if (bench::needs_actor(v) && !m.actor)
      throw bench::MissingModel(bench::to_string(v) + " needs --actor <checkpoint>");
    if (bench::needs_kinn(v) && !m.kinn) throw bench::MissingModel(bench::to_string(v) + " needs --kinn <checkpoint>");
  }
}

int emit_error(const std::string& kind, const std::string& msg, int code = 2) {
  std::cerr << json{{"error", kind}, {"message", msg}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid generalized Benders decomposition with learned master and subproblem surrogates"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed (instance seed for solve, training seed otherwise)");
  app.add_option("--tol", g.tol, "termination tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", g.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--delta1", g.delta1, "confidence threshold for 0")->check(CLI::Range(0.0, 1.0));
  app.add_option("--delta2", g.delta2, "confidence threshold for 1")->check(CLI::Range(0.0, 1.0));
  app.add_option("--feas-tol", g.feas_tol, "surrogate UBD feasibility gate")->check(CLI::PositiveNumber);
  app.add_option("--gap-mode", g.gap_mode, "relative or absolute gap")->check(CLI::IsMember({"relative", "absolute"}));
  app.add_flag("--paper-scale", g.paper_scale, "3,000 cloned instances and 10,000 PPO episodes");
  app.add_flag("--time-proxy", g.time_proxy, "Newton-iteration time proxy; drop wall-clock columns from reports");
  app.add_flag("--no-ubd-refresh", g.no_ubd_refresh, "surrogate UBD only from gated predictions");

  // gen
  auto* gen = app.add_subcommand("gen", "write instance JSON for a seed range");
  std::string gen_seeds = "0..99", gen_out;
  gen->add_option("--seeds", gen_seeds, "a..b or a,b,c");
  gen->add_option("--out", gen_out, "output directory (default: JSON lines on stdout)");

  // train-bc
  auto* tbc = app.add_subcommand("train-bc", "behavioral cloning of the exact master");
  std::string bc_out = "actor_bc.ckpt";
  int bc_instances = 0, bc_epochs = 0;
  tbc->add_option("--out", bc_out, "checkpoint path");
  tbc->add_option("--instances", bc_instances, "training instances (default from budget)");
  tbc->add_option("--epochs", bc_epochs, "epochs (default from budget)");

  // train-ppo
  auto* tppo = app.add_subcommand("train-ppo", "PPO on GBD episodes");
  std::string ppo_init, ppo_out = "actor_ppo.ckpt", ppo_curve;
  int ppo_episodes = 0;
  tppo->add_option("--init", ppo_init, "starting actor checkpoint (default: fresh)");
  tppo->add_option("--out", ppo_out, "checkpoint path");
  tppo->add_option("--episodes", ppo_episodes, "episodes (default from budget)");
  tppo->add_option("--curve", ppo_curve, "learning curve CSV");

  // train-kinn
  auto* tk = app.add_subcommand("train-kinn", "two-phase surrogate training on all feasible assignments");
  std::string k_out = "kinn.ckpt", k_curve;
  int k_e1 = -1, k_e2 = -1;
  tk->add_option("--out", k_out, "checkpoint path");
  tk->add_option("--epochs1", k_e1, "phase-1 epochs");
  tk->add_option("--epochs2", k_e2, "phase-2 epochs");
  tk->add_option("--curve", k_curve, "per-epoch loss CSV");

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance with one variant, report JSON on stdout");
  std::string s_variant = "classical", s_instance, s_actor, s_kinn;
  bool s_timing = false;
  solve->add_option("--variant", s_variant, "classical, agent-only, kinn-only, hybrid");
  solve->add_option("--instance", s_instance, "instance JSON (default: sample_instance(seed))");
  solve->add_option("--actor", s_actor, "policy checkpoint");
  solve->add_option("--kinn", s_kinn, "surrogate checkpoint");
  solve->add_flag("--timing", s_timing, "include wall-clock fields");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "benchmark table over seeded instances");
  std::string b_seeds = "0..99", b_variants = "all", b_actor, b_kinn, b_out = "bench_out";
  bench_cmd->add_option("--seeds", b_seeds, "a..b or a,b,c");
  bench_cmd->add_option("--variants", b_variants, "all or comma list");
  bench_cmd->add_option("--actor", b_actor, "policy checkpoint");
  bench_cmd->add_option("--kinn", b_kinn, "surrogate checkpoint");
  bench_cmd->add_option("--out", b_out, "output directory");

  // kinn-report
  auto* kr = app.add_subcommand("kinn-report", "surrogate accuracy table");
  std::string kr_kinn, kr_seeds = "0..99", kr_out;
  kr->add_option("--kinn", kr_kinn, "surrogate checkpoint")->required();
  kr->add_option("--seeds", kr_seeds, "a..b or a,b,c");
  kr->add_option("--out", kr_out, "CSV path");

  // verify
  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  std::vector<int> v_only;
  std::string v_artifacts;
  ver->add_option("--only", v_only, "criterion ids")->check(CLI::Range(1, 10));
  ver->add_option("--artifacts", v_artifacts, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    if (!(g.delta1 < g.delta2)) throw CliError("invalid-argument", "--delta1 must be below --delta2");

    if (*gen) {
      const auto seeds = parse_seeds(gen_seeds);
      if (!gen_out.empty()) std::filesystem::create_directories(gen_out);
      for (auto s : seeds) {
        const json j = instance_to_json(sample_instance(s));
        if (gen_out.empty()) {
          std::cout << j.dump() << "\n";
        } else {
          write_text((std::filesystem::path(gen_out) / ("instance_" + std::to_string(s) + ".json")).string(),
                     j.dump(1) + "\n");
        }
      }
      if (!gen_out.empty()) std::cout << json{{"written", seeds.size()}, {"dir", gen_out}}.dump() << "\n";
      return 0;
    }

    if (*tbc) {
      auto budget = g.budget();
      if (bc_instances > 0) budget.bc_instances = static_cast<std::size_t>(bc_instances);
      if (bc_epochs > 0) budget.bc_epochs = bc_epochs;
      auto run = bench::train_bc(budget, {}, g.seed, g.gbd());
      const auto test = rl::build_bc_dataset(bench::kBcTestSeed, 200, g.gbd());
      const double acc = rl::exact_assignment_accuracy(run.actor, test);
      rl::save_actor(bc_out, run.actor, g.seed,
                     {{"stage", "behavioral-cloning"}, {"instances", budget.bc_instances}, {"epochs", budget.bc_epochs}});
      std::cout << json{{"checkpoint", bc_out},
                        {"train_states", run.train_states},
                        {"val_states", run.val_states},
                        {"best_epoch", run.result.best_epoch},
                        {"best_val_loss", run.result.best_val_loss},
                        {"heldout_accuracy", acc}}
                       .dump()
                << "\n";
      return 0;
    }

    if (*tppo) {
      auto budget = g.budget();
      if (ppo_episodes > 0) budget.ppo_episodes = ppo_episodes;
      rl::Actor actor = ppo_init.empty() ? rl::Actor({}, g.seed) : rl::load_actor(ppo_init);
      const auto res = bench::train_ppo(actor, budget, g.seed, g.env());
      rl::save_actor(ppo_out, actor, g.seed, {{"stage", "ppo"}, {"episodes", budget.ppo_episodes}, {"init", ppo_init}});
      if (!ppo_curve.empty()) rl::write_learning_curve_csv(ppo_curve, res.curve);
      const auto [first, last] = rl::reward_window_means(res.curve, 100);
      std::cout << json{{"checkpoint", ppo_out},
                        {"episodes", res.curve.size()},
                        {"updates", res.updates},
                        {"reward_first_100", first},
                        {"reward_last_100", last}}
                       .dump()
                << "\n";
      return 0;
    }

    if (*tk) {
      auto budget = g.budget();
      if (k_e1 >= 0) budget.kinn_epochs_phase1 = k_e1;
      if (k_e2 >= 0) budget.kinn_epochs_phase2 = k_e2;
      auto fit = bench::train_case_study_kinn(budget, g.seed);
      kinn::save_kinn(k_out, fit.model,
                      {{"epochs_phase1", budget.kinn_epochs_phase1},
                       {"epochs_phase2", budget.kinn_epochs_phase2},
                       {"seeds_tried", fit.seeds_tried},
                       {"phase1_losses", fit.phase1_losses}});
      if (!k_curve.empty()) {
        std::ostringstream os;
        os << "epoch,total,stationarity,primal,complementarity\n";
        for (std::size_t e = 0; e < fit.result.trace.size(); ++e) {
          const auto& c = fit.result.trace[e];
          os << e << ',' << c.total << ',' << c.stationarity << ',' << c.primal << ',' << c.complementarity << "\n";
        }
        write_text(k_curve, os.str());
      }
      const auto last = fit.result.trace.empty() ? kinn::LossComponents{} : fit.result.trace.back();
      std::cout << json{{"checkpoint", k_out},
                        {"seed", fit.model.seed()},
                        {"seeds_tried", fit.seeds_tried},
                        {"phase1_losses", fit.phase1_losses},
                        {"final_loss",
                         {{"total", last.total},
                          {"stationarity", last.stationarity},
                          {"primal", last.primal},
                          {"complementarity", last.complementarity}}}}
                       .dump()
                << "\n";
      return 0;
    }

    if (*solve) {
      const auto v = bench::variant_from_string(s_variant);
      auto models = load_models(s_actor, s_kinn);
      require_models({v}, models);
      const MinlpInstance inst = s_instance.empty() ? sample_instance(g.seed) : load_instance(s_instance);
      const double ref = reference_solve(inst, g.gbd().ipm).Z;
      const auto rep = bench::run_variant(inst, v, models.view(), g.variant(), ref);
      std::cout << report_to_json(rep, s_timing && !g.time_proxy).dump(1) << "\n";
      return rep.status == "failed" ? 1 : 0;
    }

    if (*bench_cmd) {
      const auto seeds = parse_seeds(b_seeds);
      const auto vs = parse_variants(b_variants);
      auto models = load_models(b_actor, b_kinn);
      require_models(vs, models);
      bench::BenchmarkConfig cfg;
      cfg.variant = g.variant();
      const auto table = bench::benchmark(seeds, vs, models.view(), cfg);
      bench::write_benchmark(b_out, table, !g.time_proxy);
      std::cout << bench::summary_csv(table, !g.time_proxy);
      int failures = 0;
      for (const auto& r : table.rows) failures += r.failures;
      return failures > 0 ? 1 : 0;
    }

    if (*kr) {
      auto models = load_models("", kr_kinn);
      const auto table = bench::kinn_accuracy_report(*models.kinn, parse_seeds(kr_seeds), g.variant());
      if (!kr_out.empty()) write_text(kr_out, bench::accuracy_csv(table));
      std::cout << bench::accuracy_json(table).dump(1) << "\n";
      return 0;
    }

    if (*ver) {
      acceptance::SuiteOptions opt;
      opt.seed = g.seed;
      opt.only = v_only;
      opt.budget = g.budget();
      if (!v_artifacts.empty()) opt.artifacts = v_artifacts;
      opt.log = &std::cerr;
      bool all = true;
      acceptance::run_suite(opt, [&](const acceptance::CriterionResult& r) {
        std::cout << acceptance::format_result(r) << std::endl;
        all = all && r.pass;
      });
      return all ? 0 : 1;
    }
  } catch (const CliError& e) {
    return emit_error(e.kind(), e.what());
  } catch (const bench::MissingModel& e) {
    return emit_error("missing-model", e.what());
  } catch (const nn::CheckpointError& e) {
    return emit_error("checkpoint", e.what());
  } catch (const SubproblemFailure& e) {
    return emit_error("solver", e.what(), 1);
  } catch (const json::exception& e) {
    return emit_error("json", e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error("invalid-argument", e.what());
  } catch (const std::exception& e) {
    return emit_error("internal", e.what(), 1);
  }
  return 0;
}
