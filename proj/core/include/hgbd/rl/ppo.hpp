#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "hgbd/rl/actor_critic.hpp"
#include "hgbd/rl/environment.hpp"

namespace hgbd::rl {

struct PpoConfig {
  int episodes = 1000;
  int episodes_per_update = 8;
  int epochs = 5;
  std::size_t batch = 32;
  double lr = 5e-4;
  double gamma = 0.99;
  double gae_lambda = 0.97;
  double clip = 0.25;
  bool normalize_advantages = true;
  std::uint64_t seed = 0;
  std::uint64_t instance_seed_base = 5000;  // episode e uses instance seed base + e
};

/// min(rho A, clip(rho, 1-eps, 1+eps) A) for one sample.
double clipped_surrogate(double ratio, double advantage, double clip);

/// Mean clipped surrogate over a batch; new_log_prob is B x 1 on the tape.
nn::Var ppo_surrogate(nn::Var new_log_prob, const std::vector<double>& old_log_prob,
                      const std::vector<double>& advantages, double clip);

/// Sum over entries of the Bernoulli log-likelihood of `a` under sigmoid(logits); 1 x 1.
nn::Var bernoulli_log_prob(nn::Var logits, const BinaryAssignment& a);

/// GAE(gamma, lambda) advantages; values[t] = V(s_t), bootstrap 0 after the
/// last step or any done flag.
std::vector<double> gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                   const std::vector<bool>& dones, double gamma, double lambda);

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t instance_seed = 0;
  double reward = 0.0;
  double reward_feas = 0.0;
  double reward_gap = 0.0;
  double reward_time = 0.0;
  double final_gap = 0.0;
  int steps = 0;
  int accepted = 0;
  int fallbacks = 0;
};

struct PpoResult {
  std::vector<EpisodeRecord> curve;
  int updates = 0;
};

/// Runs PPO; `on_episode` (optional) sees every finished episode.
PpoResult ppo_train(Actor& actor, Critic& critic, const PpoConfig& cfg, const EnvConfig& env_cfg,
                    const std::function<void(const EpisodeRecord&)>& on_episode = {});

void write_learning_curve_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& curve);

/// Mean reward of the first and last `window` episodes.
std::pair<double, double> reward_window_means(const std::vector<EpisodeRecord>& curve, std::size_t window);

}  // namespace hgbd::rl
