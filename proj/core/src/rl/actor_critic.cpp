#include "hgbd/rl/actor_critic.hpp"

#include "hgbd/nn/checkpoint.hpp"

namespace hgbd::rl {

nlohmann::json to_json(const PolicyConfig& c) {
  return {{"type", "ecc-actor"},
          {"m", c.m},
          {"node_dim", c.node_dim},
          {"ecc_width", c.ecc_width},
          {"filter_hidden", c.filter_hidden},
          {"dense_width", c.dense_width}};
}

PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.m = j.at("m").get<std::size_t>();
  c.node_dim = j.at("node_dim").get<std::size_t>();
  c.ecc_width = j.at("ecc_width").get<std::size_t>();
  c.filter_hidden = j.at("filter_hidden").get<std::size_t>();
  c.dense_width = j.at("dense_width").get<std::size_t>();
  return c;
}

GraphTrunk::GraphTrunk(const std::string& name, const PolicyConfig& cfg, std::mt19937_64& rng)
    : ecc1_(name + ".ecc1", cfg.node_dim, cfg.ecc_width, 1, cfg.filter_hidden, nn::Activation::ReLU, rng),
      ecc2_(name + ".ecc2", cfg.ecc_width, cfg.ecc_width, 1, cfg.filter_hidden, nn::Activation::ReLU, rng),
      fc_(name + ".fc", cfg.ecc_width, cfg.dense_width, nn::Activation::ReLU, rng) {}

nn::Var GraphTrunk::forward(nn::Tape& t, const BipartiteGraph& g) {
  const nn::EdgeList edges = g.message_edges();
  const nn::Tensor ef = g.edge_input();
  nn::Var h = t.constant(g.node_input());
  h = ecc1_.forward(t, h, ef, edges);
  h = ecc2_.forward(t, h, ef, edges);
  return fc_.forward(t, nn::sum_rows(h));
}

std::vector<nn::Parameter*> GraphTrunk::params() {
  std::vector<nn::Parameter*> out;
  for (auto* p : ecc1_.params()) out.push_back(p);
  for (auto* p : ecc2_.params()) out.push_back(p);
  for (auto* p : fc_.params()) out.push_back(p);
  return out;
}

Actor::Actor(const PolicyConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  std::mt19937_64 rng(seed);
  trunk_ = GraphTrunk("actor", cfg, rng);
  head_ = nn::Dense("actor.out", cfg.dense_width, cfg.m, nn::Activation::Identity, rng);
}

nn::Var Actor::forward_logits(nn::Tape& t, const BipartiteGraph& g) {
  if (g.num_vars != cfg_.m || g.node_input_width() != cfg_.node_dim) {
    throw nn::ShapeError("graph does not match policy input dimensions");
  }
  return head_.forward(t, trunk_.forward(t, g));
}

std::vector<double> Actor::probabilities(const BipartiteGraph& g) {
  nn::Tape t;
  const nn::Var p = forward(t, g);
  return p.value().values();
}

std::vector<double> Actor::logits(const BipartiteGraph& g) {
  nn::Tape t;
  return forward_logits(t, g).value().values();
}

std::vector<nn::Parameter*> Actor::params() {
  auto out = trunk_.params();
  for (auto* p : head_.params()) out.push_back(p);
  return out;
}

Critic::Critic(const PolicyConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  std::mt19937_64 rng(seed);
  trunk_ = GraphTrunk("critic", cfg, rng);
  head_ = nn::Dense("critic.out", cfg.dense_width, 1, nn::Activation::Identity, rng);
}

nn::Var Critic::forward(nn::Tape& t, const BipartiteGraph& g) { return head_.forward(t, trunk_.forward(t, g)); }

double Critic::value(const BipartiteGraph& g) {
  nn::Tape t;
  return forward(t, g).value().item();
}

std::vector<nn::Parameter*> Critic::params() {
  auto out = trunk_.params();
  for (auto* p : head_.params()) out.push_back(p);
  return out;
}

void save_actor(const std::filesystem::path& path, Actor& actor, std::uint64_t seed, const nlohmann::json& meta) {
  nn::save_checkpoint(path, actor.params(), to_json(actor.config()), seed, meta);
}

Actor load_actor(const std::filesystem::path& path) {
  const auto header = nn::read_checkpoint_header(path);
  const auto& arch = header.at("architecture");
  if (arch.value("type", "") != "ecc-actor") throw nn::CheckpointError(path.string() + " is not an actor checkpoint");
  Actor actor(policy_config_from_json(arch), header.at("seed").get<std::uint64_t>());
  nn::load_checkpoint(path, actor.params());
  return actor;
}

}  // namespace hgbd::rl
