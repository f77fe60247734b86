#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "hgbd/kinn/train.hpp"
#include "hgbd/nn/checkpoint.hpp"
#include "oracles.hpp"

using namespace hgbd;
using namespace hgbd::kinn;

namespace {

const KinnConfig kSmall{8, 6};

std::vector<std::vector<double>> snapshot(const std::vector<nn::Parameter*>& ps) {
  std::vector<std::vector<double>> out;
  for (auto* p : ps) out.push_back(p->value.values());
  return out;
}

}  // namespace

TEST_CASE("smoothed Fischer-Burmeister function") {
  CHECK(fischer_burmeister(0.0, 0.0, 1e-3) == doctest::Approx(-1e-3).epsilon(1e-14));
  CHECK(fischer_burmeister(1.0, 0.0, 1e-3) == doctest::Approx(1.0 - std::sqrt(1.0 + 1e-6)).epsilon(1e-9));
  CHECK(fischer_burmeister(1.0, 0.0, 1e-3) == doctest::Approx(-5.0e-7).epsilon(1e-6));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double a = nd(rng), b = nd(rng);
    CHECK(fischer_burmeister(a, b, 1e-3) == fischer_burmeister(b, a, 1e-3));
  }
  nn::Tape t;
  const nn::Var v = fischer_burmeister(t.constant(0.7), t.constant(0.2), 1e-3);
  CHECK(v.value().item() == doctest::Approx(fischer_burmeister(0.7, 0.2, 1e-3)).epsilon(1e-15));
}

TEST_CASE("output layout of the case study") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  const KinnLayout l = KinnLayout::from_instance(inst);
  CHECK(l.db1_width() == 5);
  CHECK(l.db2_width() == 17);
  CHECK(l.mu_width() == inst.inequality_count());
  CHECK(l.db1_rows == std::vector<std::size_t>{7, 8, 9, 10, 11});
  CHECK(l.db2_target(0) == 0);
  CHECK(l.db2_target(7) == 12);
  CHECK(l.db2_target(16) == 21);
  const KinnModel model(inst, kSmall, 0);
  CHECK(model.architecture().at("branches").at("DB2") == 17);
}

TEST_CASE("dual outputs are positive and ln 2 under zero heads") {
  const MinlpInstance inst = sample_instance(0);
  KinnModel model(inst, kSmall, 3);
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    const KinnPoint pt = model.predict(y);
    for (Eigen::Index i = 0; i < pt.mu.size(); ++i) CHECK(pt.mu[i] > 0.0);
    for (Eigen::Index j = 0; j < pt.x.size(); ++j) {
      CHECK(pt.x[j] >= inst.lower()[j]);
      CHECK(pt.x[j] <= inst.upper()[j]);
    }
  }
  model.zero_dual_outputs();
  const KinnPoint pt = model.predict(BinaryAssignment{1, 0, 1, 0, 1});
  for (Eigen::Index i = 0; i < pt.mu.size(); ++i) CHECK(pt.mu[i] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("batched forward agrees with single predictions") {
  const MinlpInstance inst = sample_instance(0);
  KinnModel model(inst, kSmall, 4);
  const auto ys = enumerate_feasible_assignments(inst);
  nn::Tape t;
  const KinnOutputs o = model.forward(t, t.constant(assignments_to_tensor(ys)));
  for (std::size_t r = 0; r < ys.size(); ++r) {
    const KinnPoint pt = model.predict(ys[r]);
    for (std::size_t j = 0; j < inst.n(); ++j) CHECK(o.x.value()(r, j) == doctest::Approx(pt.x[static_cast<Eigen::Index>(j)]).epsilon(1e-14));
    for (std::size_t i = 0; i < inst.inequality_count(); ++i)
      CHECK(o.mu.value()(r, i) == doctest::Approx(pt.mu[static_cast<Eigen::Index>(i)]).epsilon(1e-14));
  }
}

TEST_CASE("loss at an exact KKT point") {
  const MinlpInstance inst = sample_instance(2);
  const KinnLossWeights w;
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    const SubproblemSolution s = solve_subproblem(inst, y);
    REQUIRE(s.status == SolveStatus::Optimal);
    const LossComponents c = kkt_loss_at(inst, y, s.x, s.mu, s.lambda, w);
    CHECK(c.stationarity <= 1e-12);
    CHECK(c.primal <= 1e-12);
    CHECK(c.complementarity <= static_cast<double>(inst.inequality_count()) * w.eps * w.eps);
  }
}

TEST_CASE("zero duals give the squared objective gradient") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  Vector x(6);
  x << 0.5, 0.4, 0.3, 0.2, 0.1, 0.25;
  Vector grad(6);
  for (std::size_t j = 0; j < 6; ++j) grad[static_cast<Eigen::Index>(j)] = inst.f_derivatives().grad[j].eval({x.data(), 6});
  const Vector mu = Vector::Zero(static_cast<Eigen::Index>(inst.inequality_count()));
  const LossComponents c = kkt_loss_at(inst, BinaryAssignment{1, 0, 1, 1, 0}, x, mu, Vector());
  CHECK(c.stationarity == doctest::Approx(grad.squaredNorm()).epsilon(1e-13));
}

TEST_CASE("loss gradient matches finite differences") {
  const MinlpInstance inst = sample_instance(1);
  KinnModel model(inst, kSmall, 13);
  const auto ys = enumerate_feasible_assignments(inst);
  const nn::Tensor yt = assignments_to_tensor(ys);
  auto run = [&](bool grad) {
    nn::Tape t;
    KinnOutputs o = model.forward(t, t.constant(yt));
    KinnLossTerms terms = kkt_loss(t, inst, yt, o.x, o.mu, nullptr, {});
    if (grad) {
      nn::zero_grads(model.params());
      t.backward(terms.total);
    }
    return terms.total.value().item();
  };
  const double err = testing::finite_difference_error(model.params(), [&] { return run(false); }, [&] { run(true); });
  CHECK(err <= 1e-4);
}

TEST_CASE("second phase only moves the dual branches") {
  const MinlpInstance inst = sample_instance(0);
  const auto ys = enumerate_feasible_assignments(inst);
  CHECK(ys.size() == 12);
  KinnModel model(inst, kSmall, 5);
  KinnTrainConfig cfg;
  cfg.epochs_phase1 = 30;
  cfg.epochs_phase2 = 0;
  cfg.lr = 1e-3;
  train_kinn(model, inst, ys, cfg);
  const auto trunk = snapshot(model.trunk_params());
  const auto primal = snapshot(model.primal_params());
  const auto dual = snapshot(model.dual_params());
  cfg.epochs_phase1 = 0;
  cfg.epochs_phase2 = 30;
  const KinnTrainResult r = train_kinn(model, inst, ys, cfg);
  CHECK(r.trace.size() == 30);
  CHECK(snapshot(model.trunk_params()) == trunk);
  CHECK(snapshot(model.primal_params()) == primal);
  CHECK(snapshot(model.dual_params()) != dual);
}

TEST_CASE("training lowers the loss and rejects bad training sets") {
  const MinlpInstance inst = sample_instance(0);
  const auto ys = enumerate_feasible_assignments(inst);
  KinnModel model(inst, kSmall, 6);
  KinnTrainConfig cfg;
  cfg.epochs_phase1 = 400;
  cfg.epochs_phase2 = 100;
  cfg.lr = 3e-3;
  const KinnTrainResult r = train_kinn(model, inst, ys, cfg);
  CHECK(r.phase1_epochs == 400);
  CHECK(r.trace.back().total < r.trace.front().total);
  CHECK_THROWS_AS(train_kinn(model, inst, {}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_kinn(model, inst, {BinaryAssignment{1, 1, 0, 0, 0}}, cfg), std::invalid_argument);
  KinnTrainConfig bad = cfg;
  bad.weights.eps = 0.0;
  CHECK_THROWS_AS(train_kinn(model, inst, ys, bad), std::invalid_argument);
}

TEST_CASE("restarts stop at the first acceptable seed") {
  const MinlpInstance inst = sample_instance(0);
  const auto ys = enumerate_feasible_assignments(inst);
  KinnTrainConfig cfg;
  cfg.epochs_phase1 = 5;
  cfg.epochs_phase2 = 5;
  const KinnFit loose = fit_kinn(inst, ys, kSmall, cfg, 40, {.max_attempts = 3, .accept_phase1_loss = 1e30});
  CHECK(loose.seeds_tried == std::vector<std::uint64_t>{40});
  CHECK(loose.result.trace.size() == 10);
  const KinnFit strict = fit_kinn(inst, ys, kSmall, cfg, 40, {.max_attempts = 3, .accept_phase1_loss = 0.0});
  CHECK(strict.seeds_tried.size() == 3);
  const double best = *std::min_element(strict.phase1_losses.begin(), strict.phase1_losses.end());
  CHECK(strict.result.trace[4].total == best);
}

TEST_CASE("cut from exact values equals the exact cut") {
  const MinlpInstance inst = sample_instance(7);
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    const SubproblemSolution s = solve_subproblem(inst, y);
    const OptimalityCut exact = build_cut(inst, y, s);
    const OptimalityCut sur = build_cut(inst, y, s.x, s.lambda, s.mu, CutSource::Kinn);
    CHECK(std::abs(exact.constant - sur.constant) <= 1e-9);
    CHECK((exact.coeff - sur.coeff).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(max_primal_violation(inst, y, s.x) <= 1e-8);
  }
}

TEST_CASE("surrogate oracle gates the upper bound on feasibility") {
  const MinlpInstance inst = sample_instance(3);
  const KinnModel model(inst, kSmall, 8);  // untrained
  KinnSubproblemOracle gated(model, 1e-4, false);
  KinnSubproblemOracle refreshed(model, 1e-4, true);
  int refreshes = 0;
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    const KinnCut kc = predict_cut(model, inst, y, 1e-4);
    const SubproblemEvaluation a = gated.evaluate(inst, y);
    CHECK(a.ubd_candidate.has_value() == (kc.max_violation <= 1e-4));
    CHECK_FALSE(a.exact_refresh);
    const SubproblemEvaluation b = refreshed.evaluate(inst, y);
    REQUIRE(b.ubd_candidate.has_value());
    if (b.exact_refresh) {
      ++refreshes;
      CHECK(*b.ubd_candidate == doctest::Approx(solve_subproblem(inst, y).Z).epsilon(1e-12));
    }
    CHECK(b.cut.constant == kc.cut.constant);
    CHECK(b.cut.source == CutSource::Kinn);
  }
  CHECK(refreshes == refreshed.refresh_calls());
}

TEST_CASE("surrogate checkpoint round trip") {
  const MinlpInstance inst = sample_instance(0);
  KinnModel model(inst, kSmall, 21);
  const auto path = std::filesystem::temp_directory_path() / "hgbd_test_kinn.bin";
  save_kinn(path, model, {{"note", "unit"}});
  const KinnModel back = load_kinn(path, sample_instance(5));  // one model serves every instance
  const BinaryAssignment y{0, 1, 1, 0, 1};
  CHECK(back.predict(y).x == model.predict(y).x);
  CHECK(back.predict(y).mu == model.predict(y).mu);
  CHECK(back.seed() == 21);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_kinn(path, inst), nn::CheckpointError);
}
