#include "hgbd/bench/pipeline.hpp"

namespace hgbd::bench {

TrainingBudget TrainingBudget::paper_scale() {
  TrainingBudget b;
  b.bc_instances = 3000;
  b.ppo_episodes = 10000;
  return b;
}

BcRun train_bc(const TrainingBudget& budget, const rl::PolicyConfig& arch, std::uint64_t seed,
               const GbdOptions& gbd) {
  BcRun run{rl::Actor(arch, seed), {}, 0, 0};
  const auto train = rl::build_bc_dataset(kBcTrainSeed, budget.bc_instances, gbd);
  const auto val = rl::build_bc_dataset(kBcValSeed, budget.bc_val_instances, gbd);
  run.train_states = train.size();
  run.val_states = val.size();
  rl::BcConfig cfg;
  cfg.epochs = budget.bc_epochs;
  cfg.seed = seed;
  run.result = rl::behavioral_clone(run.actor, train, val, cfg);
  return run;
}

rl::PpoResult train_ppo(rl::Actor& actor, const TrainingBudget& budget, std::uint64_t seed, const rl::EnvConfig& env,
                        const std::function<void(const rl::EpisodeRecord&)>& on_episode) {
  rl::Critic critic(actor.config(), seed + 1);
  rl::PpoConfig cfg;
  cfg.episodes = budget.ppo_episodes;
  cfg.seed = seed;
  cfg.instance_seed_base = kPpoSeed;
  return rl::ppo_train(actor, critic, cfg, env, on_episode);
}

kinn::KinnFit train_case_study_kinn(const TrainingBudget& budget, std::uint64_t seed, const kinn::KinnConfig& arch,
                                    const std::function<void(int, const kinn::LossComponents&)>& progress,
                                    int log_every) {
  // Constraints do not depend on the coefficients, so any instance will do.
  const MinlpInstance inst = sample_instance(0);
  const auto Y = enumerate_feasible_assignments(inst);
  kinn::KinnTrainConfig cfg;
  cfg.epochs_phase1 = budget.kinn_epochs_phase1;
  cfg.epochs_phase2 = budget.kinn_epochs_phase2;
  cfg.log_every = log_every;
  return kinn::fit_kinn(inst, Y, arch, cfg, seed, {}, progress);
}

}  // namespace hgbd::bench
