#pragma once

#include <functional>

#include "hgbd/kinn/train.hpp"
#include "hgbd/rl/behavioral_cloning.hpp"
#include "hgbd/rl/ppo.hpp"

namespace hgbd::bench {

// Seed ranges.  Test instances are 0..99; everything used for training is
// disjoint from them and from each other.
inline constexpr std::uint64_t kBcTrainSeed = 1000;
inline constexpr std::uint64_t kBcTestSeed = 2000;
inline constexpr std::uint64_t kBcValSeed = 3000;
inline constexpr std::uint64_t kPpoSeed = 5000;

struct TrainingBudget {
  std::size_t bc_instances = 300;
  std::size_t bc_val_instances = 100;
  int bc_epochs = 40;
  int ppo_episodes = 1000;
  int kinn_epochs_phase1 = 40000;
  int kinn_epochs_phase2 = 40000;

  static TrainingBudget desk() { return {}; }
  /// 3,000 cloned instances and 10,000 PPO episodes.
  static TrainingBudget paper_scale();
};

struct BcRun {
  rl::Actor actor;
  rl::BcResult result;
  std::size_t train_states = 0;
  std::size_t val_states = 0;
};

/// Clones the exact master on instance seeds kBcTrainSeed + [0, bc_instances).
BcRun train_bc(const TrainingBudget& budget, const rl::PolicyConfig& arch, std::uint64_t seed,
               const GbdOptions& gbd = {});

/// PPO on instance seeds kPpoSeed + episode; the critic starts fresh.
rl::PpoResult train_ppo(rl::Actor& actor, const TrainingBudget& budget, std::uint64_t seed, const rl::EnvConfig& env,
                        const std::function<void(const rl::EpisodeRecord&)>& on_episode = {});

/// Two-phase surrogate training on every feasible assignment of the case study.
kinn::KinnFit train_case_study_kinn(const TrainingBudget& budget, std::uint64_t seed,
                                    const kinn::KinnConfig& arch = {},
                                    const std::function<void(int, const kinn::LossComponents&)>& progress = {},
                                    int log_every = 0);

}  // namespace hgbd::bench
