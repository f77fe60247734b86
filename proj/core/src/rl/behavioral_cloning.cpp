#include "hgbd/rl/behavioral_cloning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hgbd/nn/adam.hpp"

namespace hgbd::rl {

nn::Var bce_with_logits(nn::Var logits, const BinaryAssignment& label) {
  // softplus(z) - y z, averaged over entries
  nn::Tensor y(1, label.size());
  for (std::size_t i = 0; i < label.size(); ++i) y[i] = label[i];
  nn::Var yz = nn::mul(logits, logits.tape->constant(y));
  return nn::mean(nn::sub(nn::softplus(logits), yz));
}

double bce_loss(Actor& actor, const std::vector<LabeledState>& data) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& d : data) {
    nn::Tape t;
    s += bce_with_logits(actor.forward_logits(t, d.graph), d.label).value().item();
  }
  return s / static_cast<double>(data.size());
}

namespace {

std::vector<nn::Tensor> snapshot(const std::vector<nn::Parameter*>& ps) {
  std::vector<nn::Tensor> out;
  for (const auto* p : ps) out.push_back(p->value);
  return out;
}

void restore(const std::vector<nn::Parameter*>& ps, const std::vector<nn::Tensor>& s) {
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = s[i];
}

}  // namespace

BcResult behavioral_clone(Actor& actor, const std::vector<LabeledState>& train,
                          const std::vector<LabeledState>& val, const BcConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("behavioral cloning needs a nonempty dataset");
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be positive");
  const auto params = actor.params();
  nn::Adam opt(params, {.lr = cfg.lr});
  std::mt19937_64 rng(cfg.seed);
  const auto& select = val.empty() ? train : val;

  BcResult res;
  res.best_val_loss = bce_loss(actor, select);
  auto best = snapshot(params);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      opt.zero_grad();
      const double w = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const auto& d = train[order[k]];
        nn::Tape t;
        nn::Var loss = nn::scale(bce_with_logits(actor.forward_logits(t, d.graph), d.label), w);
        total += loss.value().item() / w;
        t.backward(loss);
      }
      opt.step();
    }
    const double train_loss = total / static_cast<double>(train.size());
    if (!std::isfinite(train_loss)) throw std::runtime_error("behavioral cloning loss is not finite");
    res.train_loss.push_back(train_loss);
    const double v = bce_loss(actor, select);
    if (!val.empty()) res.val_loss.push_back(v);
    if (v < res.best_val_loss) {
      res.best_val_loss = v;
      res.best_epoch = epoch;
      best = snapshot(params);
    }
  }
  restore(params, best);
  return res;
}

double exact_assignment_accuracy(Actor& actor, const std::vector<LabeledState>& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& d : data) {
    const auto p = actor.probabilities(d.graph);
    bool ok = true;
    for (std::size_t i = 0; i < p.size(); ++i) ok = ok && ((p[i] >= 0.5 ? 1 : 0) == d.label[i]);
    hits += ok ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace hgbd::rl
