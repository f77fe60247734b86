#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hgbd/nn/adam.hpp"
#include "hgbd/nn/checkpoint.hpp"
#include "hgbd/nn/layers.hpp"
#include "oracles.hpp"

using namespace hgbd;
using namespace hgbd::nn;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// loss = sum(op(p) .* w) for a fixed random weighting w of the output
double check_unary(const std::function<Var(Var)>& op, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Parameter p("p", random_tensor(3, 4, rng, lo, hi));
  Tensor w;
  auto build = [&](Tape& t) {
    Var out = op(t.param(p));
    if (w.size() == 0) w = random_tensor(out.rows(), out.cols(), rng);
    return sum(mul(out, t.constant(w)));
  };
  auto loss = [&] {
    Tape t;
    return build(t).value().item();
  };
  auto analytic = [&] {
    p.zero_grad();
    Tape t;
    t.backward(build(t));
  };
  return testing::finite_difference_error({&p}, loss, analytic);
}

double check_binary(const std::function<Var(Var, Var)>& op, std::size_t ar, std::size_t ac, std::size_t br,
                    std::size_t bc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Parameter a("a", random_tensor(ar, ac, rng));
  Parameter b("b", random_tensor(br, bc, rng));
  Tensor w;
  auto build = [&](Tape& t) {
    Var out = op(t.param(a), t.param(b));
    if (w.size() == 0) w = random_tensor(out.rows(), out.cols(), rng);
    return sum(mul(out, t.constant(w)));
  };
  auto loss = [&] {
    Tape t;
    return build(t).value().item();
  };
  auto analytic = [&] {
    a.zero_grad();
    b.zero_grad();
    Tape t;
    t.backward(build(t));
  };
  return testing::finite_difference_error({&a, &b}, loss, analytic);
}

}  // namespace

TEST_CASE("scalar activations") {
  CHECK(sigmoid_value(0.0) == 0.5);
  CHECK(softplus_value(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus_value(800.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(softplus_value(-800.0)));
  CHECK(sigmoid_value(-800.0) >= 0.0);
}

TEST_CASE("identity dense layer passes the input through") {
  std::mt19937_64 rng(1);
  Dense d("d", 3, 3, Activation::Identity, rng);
  d.weight().value = Tensor(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  d.bias().value = Tensor(1, 3);
  const Tensor x(2, 3, {1.5, -2, 3, 0.25, 7, -1});
  CHECK(d.infer(x).values() == x.values());
  Tape t;
  CHECK(d.forward(t, t.constant(x)).value().values() == x.values());
}

TEST_CASE("unary tape operations match finite differences") {
  const double tol = 1e-5;
  CHECK(check_unary([](Var v) { return sigmoid(v); }, -2, 2, 1) <= tol);
  CHECK(check_unary([](Var v) { return softplus(v); }, -2, 2, 2) <= tol);
  CHECK(check_unary([](Var v) { return exp(v); }, -1, 1, 3) <= tol);
  CHECK(check_unary([](Var v) { return log(v); }, 0.5, 2, 4) <= tol);
  CHECK(check_unary([](Var v) { return sqrt(v); }, 0.5, 2, 5) <= tol);
  CHECK(check_unary([](Var v) { return square(v); }, -2, 2, 6) <= tol);
  CHECK(check_unary([](Var v) { return reciprocal(v); }, 0.5, 2, 7) <= tol);
  CHECK(check_unary([](Var v) { return neg(v); }, -2, 2, 8) <= tol);
  CHECK(check_unary([](Var v) { return scale(v, -3.5); }, -2, 2, 9) <= tol);
  CHECK(check_unary([](Var v) { return add_scalar(v, 1.25); }, -2, 2, 10) <= tol);
  CHECK(check_unary([](Var v) { return relu(v); }, 0.1, 2, 11) <= tol);
  CHECK(check_unary([](Var v) { return clamp(v, -0.5, 0.5); }, -2, 2, 12) <= 1e-4);
  CHECK(check_unary([](Var v) { return mean(v); }, -2, 2, 13) <= tol);
  CHECK(check_unary([](Var v) { return sum_rows(v); }, -2, 2, 14) <= tol);
  CHECK(check_unary([](Var v) { return column(v, 2); }, -2, 2, 15) <= tol);
  CHECK(check_unary([](Var v) { return slice_cols(v, 1, 2); }, -2, 2, 16) <= tol);
  CHECK(check_unary([](Var v) { return squared_norm(v); }, -2, 2, 17) <= tol);
  CHECK(check_unary([](Var v) { return concat_cols({v, square(v)}); }, -2, 2, 18) <= tol);
}

TEST_CASE("binary tape operations match finite differences") {
  const double tol = 1e-5;
  CHECK(check_binary([](Var a, Var b) { return matmul(a, b); }, 3, 4, 4, 2, 1) <= tol);
  CHECK(check_binary([](Var a, Var b) { return add(a, b); }, 3, 4, 3, 4, 2) <= tol);
  CHECK(check_binary([](Var a, Var b) { return sub(a, b); }, 3, 4, 3, 4, 3) <= tol);
  CHECK(check_binary([](Var a, Var b) { return mul(a, b); }, 3, 4, 3, 4, 4) <= tol);
  CHECK(check_binary([](Var a, Var b) { return add_bias(a, b); }, 3, 4, 1, 4, 5) <= tol);
  CHECK(check_binary([](Var a, Var b) { return mul_col(a, b); }, 3, 4, 3, 1, 6) <= tol);
  CHECK(check_binary([](Var a, Var b) { return minimum(a, b); }, 3, 4, 3, 4, 7) <= tol);
}

TEST_CASE("constant parameters get zero adjoints and heaviside passes none") {
  Parameter used("u", Tensor(1, 2, {1.0, 2.0}));
  Parameter dead("d", Tensor(1, 2, {3.0, 4.0}));
  Tape t;
  Var d = t.param(dead);
  Var loss = sum(add(square(t.param(used)), scale(heaviside(d), 5.0)));
  t.backward(loss);
  CHECK(used.grad.values() == std::vector<double>{2.0, 4.0});
  CHECK(dead.grad.values() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("quadratic loss gradient is twice the parameters") {
  std::mt19937_64 rng(2);
  Parameter p("p", random_tensor(4, 3, rng));
  Tape t;
  t.backward(squared_norm(t.param(p)));
  for (std::size_t i = 0; i < p.value.size(); ++i) CHECK(p.grad[i] == 2.0 * p.value[i]);
}

TEST_CASE("32-unit dense stack matches finite differences") {
  std::mt19937_64 rng(4);
  Dense l1("l1", 6, 32, Activation::Softplus, rng);
  Dense l2("l2", 32, 32, Activation::Sigmoid, rng);
  Dense l3("l3", 32, 3, Activation::Identity, rng);
  const Tensor x = random_tensor(5, 6, rng);
  const Tensor target = random_tensor(5, 3, rng);
  std::vector<Parameter*> ps;
  for (Dense* d : {&l1, &l2, &l3})
    for (auto* p : d->params()) ps.push_back(p);
  auto build = [&](Tape& t) { return mean(square(sub(l3.forward(t, l2.forward(t, l1.forward(t, t.constant(x)))), t.constant(target)))); };
  auto loss = [&] {
    Tape t;
    return build(t).value().item();
  };
  auto analytic = [&] {
    zero_grads(ps);
    Tape t;
    t.backward(build(t));
  };
  // sigmoid saturation leaves entries near 1e-6, where double roundoff alone
  // exceeds 1e-5 relative; those are held to the roundoff floor instead
  const double floor = std::max(1e-6, testing::roundoff_floor(loss(), 1e-6, 1e-5));
  CHECK(testing::finite_difference_error(ps, loss, analytic, 1e-6, floor) <= 1e-5);
  CHECK(parameter_count(ps) == 6 * 32 + 32 + 32 * 32 + 32 + 32 * 3 + 3);
}

TEST_CASE("edge-conditioned layer matches finite differences") {
  std::mt19937_64 rng(5);
  EccLayer ecc("ecc", 4, 5, 2, 3, Activation::Softplus, rng);
  EdgeList edges;
  edges.num_nodes = 4;
  edges.src = {0, 1, 1, 2, 3, 0};
  edges.dst = {1, 0, 2, 1, 0, 3};
  Tensor ef = random_tensor(6, 2, rng);
  Parameter h("h", random_tensor(4, 4, rng));
  auto ps = ecc.params();
  ps.push_back(&h);
  auto build = [&](Tape& t) { return squared_norm(ecc.forward(t, t.param(h), ef, edges)); };
  auto loss = [&] {
    Tape t;
    return build(t).value().item();
  };
  auto analytic = [&] {
    zero_grads(ps);
    Tape t;
    t.backward(build(t));
  };
  CHECK(testing::finite_difference_error(ps, loss, analytic) <= 1e-5);
}

TEST_CASE("edge-conditioned layer structure") {
  std::mt19937_64 rng(6);
  EccLayer ecc("ecc", 3, 3, 2, 2, Activation::Identity, rng);
  // filter hidden units forced to zero so only the constant channel (W_0 = I) remains
  ecc.filter_weight().value.fill(0.0);
  ecc.filter_bias().value.fill(-1.0);
  ecc.weight().value.fill(0.0);
  for (std::size_t c = 0; c < 3; ++c) ecc.weight().value(c, c) = 1.0;
  ecc.bias().value.fill(0.0);
  const Tensor h(2, 3, {1, 2, 3, -4, 5, 0.5});
  const Tensor ef(2, 2, {0.3, 0.7, 0.3, 0.7});

  SUBCASE("single edge copies the neighbor") {
    EdgeList e;
    e.num_nodes = 2;
    e.src = {1, 0};
    e.dst = {0, 1};
    Tape t;
    const Tensor out = ecc.forward(t, t.constant(h), ef, e).value();
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(out(0, c) == h(1, c));
      CHECK(out(1, c) == h(0, c));
    }
  }
  SUBCASE("no edges gives act(b)") {
    ecc.bias().value = Tensor(1, 3, {0.1, -0.2, 0.3});
    EdgeList e;
    e.num_nodes = 2;
    Tape t;
    const Tensor out = ecc.forward(t, t.constant(h), Tensor(0, 2), e).value();
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 3; ++c) CHECK(out(r, c) == ecc.bias().value[c]);
  }
  SUBCASE("duplicated neighbors leave the mean unchanged") {
    std::mt19937_64 r2(9);
    EccLayer rand_ecc("r", 3, 4, 2, 2, Activation::Softplus, r2);
    const Tensor h3(3, 3, {1, 2, 3, 0.5, -1, 2, 0.5, -1, 2});  // nodes 1 and 2 identical
    EdgeList once, twice;
    once.num_nodes = twice.num_nodes = 3;
    once.src = {1};
    once.dst = {0};
    twice.src = {1, 2};
    twice.dst = {0, 0};
    const Tensor ef1(1, 2, {0.4, -0.2});
    const Tensor ef2(2, 2, {0.4, -0.2, 0.4, -0.2});
    Tape t;
    const Tensor a = rand_ecc.forward(t, t.constant(h3), ef1, once).value();
    const Tensor b = rand_ecc.forward(t, t.constant(h3), ef2, twice).value();
    for (std::size_t c = 0; c < 4; ++c) CHECK(a(0, c) == doctest::Approx(b(0, c)).epsilon(1e-14));
  }
}

TEST_CASE("adam fixed points") {
  std::mt19937_64 rng(7);
  Parameter p("p", random_tensor(2, 3, rng));
  const Tensor start = p.value;
  {
    Adam opt({&p}, {.lr = 0.01});
    for (int k = 0; k < 5; ++k) {
      opt.zero_grad();
      opt.step();
    }
    CHECK(p.value.values() == start.values());
  }
  {
    Adam opt({&p}, {.lr = 0.0});
    p.grad.fill(3.0);
    opt.step();
    CHECK(p.value.values() == start.values());
  }
  {
    const double lr = 0.01;
    Adam opt({&p}, {.lr = lr});
    Tensor before;
    for (int k = 0; k < 200; ++k) {
      before = p.value;
      for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] = i % 2 ? 2.0 : -0.5;
      opt.step();
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double step = p.value[i] - before[i];
      CHECK(step == doctest::Approx(i % 2 ? -lr : lr).epsilon(1e-5));
    }
  }
}

TEST_CASE("checkpoint round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "hgbd_test_nn";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ck.bin";
  std::mt19937_64 rng(8);
  Dense a("a", 3, 4, Activation::ReLU, rng);
  Dense b("a", 3, 4, Activation::ReLU, rng);
  save_checkpoint(path, a.params(), {{"type", "test"}}, 8, {{"note", "x"}});
  const auto header = read_checkpoint_header(path);
  CHECK(header.at("seed") == 8);
  CHECK(header.at("architecture").at("type") == "test");
  load_checkpoint(path, b.params());
  CHECK(b.weight().value.values() == a.weight().value.values());
  CHECK(b.bias().value.values() == a.bias().value.values());

  Dense wrong("a", 3, 5, Activation::ReLU, rng);
  CHECK_THROWS_AS(load_checkpoint(path, wrong.params()), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin", b.params()), CheckpointError);
  {
    std::ofstream(dir / "empty.bin").close();
  }
  CHECK_THROWS_AS(read_checkpoint_header(dir / "empty.bin"), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("shape errors") {
  Tape t;
  Var a = t.constant(Tensor(2, 3));
  Var b = t.constant(Tensor(2, 2));
  CHECK_THROWS_AS(add(a, b), ShapeError);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
  CHECK_THROWS_AS(log(t.constant(Tensor(1, 1, -1.0))), DomainViolation);
}
