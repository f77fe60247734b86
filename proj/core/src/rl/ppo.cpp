#include "hgbd/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hgbd/nn/adam.hpp"

namespace hgbd::rl {

double clipped_surrogate(double ratio, double advantage, double clip) {
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage);
}

nn::Var ppo_surrogate(nn::Var new_log_prob, const std::vector<double>& old_log_prob,
                      const std::vector<double>& advantages, double clip) {
  const std::size_t n = old_log_prob.size();
  if (new_log_prob.rows() != n || new_log_prob.cols() != 1 || advantages.size() != n) {
    throw nn::ShapeError("ppo_surrogate: batch shapes differ");
  }
  nn::Tape& t = *new_log_prob.tape;
  nn::Tensor old(n, 1, old_log_prob);
  nn::Tensor adv(n, 1, advantages);
  nn::Var ratio = nn::exp(nn::sub(new_log_prob, t.constant(old)));
  nn::Var a = t.constant(adv);
  nn::Var unclipped = nn::mul(ratio, a);
  nn::Var clipped = nn::mul(nn::clamp(ratio, 1.0 - clip, 1.0 + clip), a);
  return nn::mean(nn::minimum(unclipped, clipped));
}

nn::Var bernoulli_log_prob(nn::Var logits, const BinaryAssignment& a) {
  // ln p_i = -softplus(-z_i), ln(1-p_i) = -softplus(z_i): -softplus(s_i z_i), s_i = 1 - 2 a_i
  nn::Tensor s(1, a.size());
  for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] == 1 ? -1.0 : 1.0;
  return nn::neg(nn::sum(nn::softplus(nn::mul(logits, logits.tape->constant(s)))));
}

std::vector<double> gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                   const std::vector<bool>& dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw std::invalid_argument("gae: length mismatch");
  std::vector<double> adv(n, 0.0);
  double next_adv = 0.0;
  double next_value = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = (dones[k] || k + 1 == n) ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    adv[k] = delta + gamma * lambda * live * next_adv;
    next_adv = adv[k];
    next_value = values[k];
  }
  return adv;
}

namespace {

struct Sample {
  BipartiteGraph state;
  BinaryAssignment action;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

}  // namespace

PpoResult ppo_train(Actor& actor, Critic& critic, const PpoConfig& cfg, const EnvConfig& env_cfg,
                    const std::function<void(const EpisodeRecord&)>& on_episode) {
  if (cfg.episodes <= 0 || cfg.episodes_per_update <= 0 || cfg.batch == 0) {
    throw std::invalid_argument("ppo: episode and batch counts must be positive");
  }
  nn::Adam actor_opt(actor.params(), {.lr = cfg.lr});
  nn::Adam critic_opt(critic.params(), {.lr = cfg.lr});
  std::mt19937_64 rng(cfg.seed);
  GbdEnvironment env(env_cfg);
  PpoResult res;
  std::vector<Sample> buffer;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const std::uint64_t iseed = cfg.instance_seed_base + static_cast<std::uint64_t>(ep);
    const MinlpInstance inst = sample_instance(iseed);
    BipartiteGraph state = env.reset(inst);

    std::vector<Sample> traj;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<bool> dones;
    EpisodeRecord rec;
    rec.episode = ep;
    rec.instance_seed = iseed;
    while (!env.done()) {
      const auto z = actor.logits(state);
      std::vector<double> p(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) p[i] = nn::sigmoid_value(z[i]);
      SampledAction a = sample_action(p, rng);
      a.log_prob = log_prob_from_logits(z, a.y);
      values.push_back(critic.value(state));
      StepResult sr = env.step(a.y);
      traj.push_back({std::move(state), a.y, a.log_prob, 0.0, 0.0});
      rewards.push_back(sr.reward.total);
      dones.push_back(sr.done);
      rec.reward += sr.reward.total;
      rec.reward_feas += sr.reward.feas;
      rec.reward_gap += sr.reward.gap;
      rec.reward_time += sr.reward.time;
      rec.final_gap = sr.gap;
      ++rec.steps;
      rec.accepted += sr.accepted ? 1 : 0;
      rec.fallbacks += sr.accepted ? 0 : 1;
      state = std::move(sr.next_state);
    }
    const auto adv = gae_advantages(rewards, values, dones, cfg.gamma, cfg.gae_lambda);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      traj[k].advantage = adv[k];
      traj[k].ret = adv[k] + values[k];
      buffer.push_back(std::move(traj[k]));
    }
    res.curve.push_back(rec);
    if (on_episode) on_episode(rec);

    const bool update_now = (ep + 1) % cfg.episodes_per_update == 0 || ep + 1 == cfg.episodes;
    if (!update_now || buffer.empty()) continue;

    if (cfg.normalize_advantages && buffer.size() > 1) {
      double mean = 0.0;
      for (const auto& s : buffer) mean += s.advantage;
      mean /= static_cast<double>(buffer.size());
      double var = 0.0;
      for (const auto& s : buffer) var += (s.advantage - mean) * (s.advantage - mean);
      const double sd = std::sqrt(var / static_cast<double>(buffer.size()));
      for (auto& s : buffer) s.advantage = (s.advantage - mean) / (sd + 1e-8);
    }

    std::vector<std::size_t> order(buffer.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
        const std::size_t end = std::min(order.size(), start + cfg.batch);
        const double w = 1.0 / static_cast<double>(end - start);
        actor_opt.zero_grad();
        critic_opt.zero_grad();
        for (std::size_t k = start; k < end; ++k) {
          const Sample& s = buffer[order[k]];
          nn::Tape t;
          nn::Var lp = bernoulli_log_prob(actor.forward_logits(t, s.state), s.action);
          nn::Var surrogate = ppo_surrogate(lp, {s.old_log_prob}, {s.advantage}, cfg.clip);
          nn::Var v = critic.forward(t, s.state);
          nn::Var value_loss = nn::square(nn::add_scalar(v, -s.ret));
          nn::Var loss = nn::scale(nn::sub(value_loss, surrogate), w);
          if (!std::isfinite(loss.value().item())) {
            throw std::runtime_error("ppo loss is not finite (surrogate " +
                                     std::to_string(surrogate.value().item()) + ", value loss " +
                                     std::to_string(value_loss.value().item()) + ")");
          }
          t.backward(loss);
        }
        actor_opt.step();
        critic_opt.step();
      }
    }
    ++res.updates;
    buffer.clear();
  }
  return res;
}

void write_learning_curve_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "episode,instance_seed,reward,reward_feas,reward_gap,reward_time,final_gap,steps,accepted,fallbacks\n";
  os.precision(10);
  for (const auto& r : curve) {
    os << r.episode << ',' << r.instance_seed << ',' << r.reward << ',' << r.reward_feas << ',' << r.reward_gap
       << ',' << r.reward_time << ',' << r.final_gap << ',' << r.steps << ',' << r.accepted << ','
       << r.fallbacks << '\n';
  }
}

std::pair<double, double> reward_window_means(const std::vector<EpisodeRecord>& curve, std::size_t window) {
  if (curve.empty() || window == 0) return {0.0, 0.0};
  const std::size_t w = std::min(window, curve.size());
  double first = 0.0;
  double last = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    first += curve[k].reward;
    last += curve[curve.size() - w + k].reward;
  }
  return {first / static_cast<double>(w), last / static_cast<double>(w)};
}

}  // namespace hgbd::rl
