#pragma once

#include <filesystem>
#include <random>

#include <json.hpp>

#include "hgbd/nn/layers.hpp"
#include "hgbd/rl/graph.hpp"

namespace hgbd::rl {

struct PolicyConfig {
  std::size_t m = 5;
  std::size_t node_dim = 10;  // BipartiteGraph::node_input_width()
  std::size_t ecc_width = 64;
  std::size_t filter_hidden = 4;
  std::size_t dense_width = 64;
};

nlohmann::json to_json(const PolicyConfig& c);
PolicyConfig policy_config_from_json(const nlohmann::json& j);

/// ECC(relu) -> ECC(relu) -> sum-pool -> dense(relu).  Output 1 x dense_width.
class GraphTrunk {
 public:
  GraphTrunk() = default;
  GraphTrunk(const std::string& name, const PolicyConfig& cfg, std::mt19937_64& rng);
  nn::Var forward(nn::Tape& t, const BipartiteGraph& g);
  std::vector<nn::Parameter*> params();

 private:
  nn::EccLayer ecc1_;
  nn::EccLayer ecc2_;
  nn::Dense fc_;
};

/// Policy head: dense m, sigmoid.  forward_logits() returns the pre-sigmoid
/// values so log-probabilities can be formed without cancellation.
class Actor {
 public:
  Actor() = default;
  Actor(const PolicyConfig& cfg, std::uint64_t seed);

  nn::Var forward_logits(nn::Tape& t, const BipartiteGraph& g);
  nn::Var forward(nn::Tape& t, const BipartiteGraph& g) { return nn::sigmoid(forward_logits(t, g)); }
  /// p in (0,1)^m.
  std::vector<double> probabilities(const BipartiteGraph& g);
  std::vector<double> logits(const BipartiteGraph& g);

  std::vector<nn::Parameter*> params();
  nn::Dense& head() { return head_; }
  const PolicyConfig& config() const { return cfg_; }

 private:
  PolicyConfig cfg_;
  GraphTrunk trunk_;
  nn::Dense head_;
};

/// State-value estimate: same trunk shape, single linear output.
class Critic {
 public:
  Critic() = default;
  Critic(const PolicyConfig& cfg, std::uint64_t seed);

  nn::Var forward(nn::Tape& t, const BipartiteGraph& g);
  double value(const BipartiteGraph& g);
  std::vector<nn::Parameter*> params();
  const PolicyConfig& config() const { return cfg_; }

 private:
  PolicyConfig cfg_;
  GraphTrunk trunk_;
  nn::Dense head_;
};

void save_actor(const std::filesystem::path& path, Actor& actor, std::uint64_t seed,
                const nlohmann::json& meta = nlohmann::json::object());
Actor load_actor(const std::filesystem::path& path);

}  // namespace hgbd::rl
