#include <doctest.h>

#include <cmath>
#include <random>

#include "hgbd/benders/gbd.hpp"
#include "oracles.hpp"

using namespace hgbd;

namespace {

OptimalityCut plain_cut(double constant, std::vector<double> coeff) {
  OptimalityCut c;
  c.constant = constant;
  c.coeff = Eigen::Map<Vector>(coeff.data(), static_cast<Eigen::Index>(coeff.size()));
  return c;
}

}  // namespace

TEST_CASE("cut evaluation arithmetic") {
  const OptimalityCut c = plain_cut(1.0, {1, -1, 0, 0, 0});
  CHECK(evaluate_cut(c, BinaryAssignment{1, 0, 0, 0, 0}) == 2.0);
  CHECK(evaluate_cut(c, BinaryAssignment{0, 0, 0, 0, 0}) == 1.0);
  CHECK_THROWS_AS(evaluate_cut(c, BinaryAssignment{1, 0}), DimensionError);
}

TEST_CASE("zero duals reduce the cut to f(x) + e'y") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  Vector x(6);
  x << 0.3, 0.1, 0.2, 0.4, 0.05, 0.2;
  const BinaryAssignment yk{0, 1, 1, 1, 0};
  const Vector mu = Vector::Zero(static_cast<Eigen::Index>(inst.inequality_count()));
  const OptimalityCut cut = build_cut(inst, yk, x, Vector(), mu);
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    CHECK(evaluate_cut(cut, y) == doctest::Approx(evaluate_objective(inst, x, y)).epsilon(1e-13));
  }
}

TEST_CASE("cut coefficients follow the coupling structure") {
  const MinlpInstance inst = sample_instance(4);
  for (const auto& y : enumerate_feasible_assignments(inst)) {
    const SubproblemSolution s = solve_subproblem(inst, y);
    REQUIRE(s.status == SolveStatus::Optimal);
    const OptimalityCut cut = build_cut(inst, y, s);
    for (Eigen::Index i = 0; i < 5; ++i) {
      CHECK(cut.coeff[i] == doctest::Approx(inst.e()[i] - kCaseStudyBigM * s.mu[7 + i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact cuts are tight at the generator and valid elsewhere") {
  for (std::uint64_t seed : {0, 6}) {
    const MinlpInstance inst = sample_instance(seed);
    const auto ys = enumerate_feasible_assignments(inst);
    std::vector<double> Z;
    for (const auto& y : ys) Z.push_back(testing::grid_polish_case_study(inst, y).Z);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const SubproblemSolution s = solve_subproblem(inst, ys[k]);
      const OptimalityCut cut = build_cut(inst, ys[k], s);
      CHECK(std::abs(evaluate_cut(cut, ys[k]) - Z[k]) <= 1e-6);
      for (std::size_t j = 0; j < ys.size(); ++j) {
        CHECK_MESSAGE(evaluate_cut(cut, ys[j]) <= Z[j] + 1e-6, "cut from ", ys[k].to_string(), " at ",
                      ys[j].to_string());
      }
    }
  }
}

TEST_CASE("master with no cuts and with one cut") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  MasterState master(inst);
  CHECK(master.feasible().size() == 12);
  MasterSolution s = solve_master(master);
  CHECK(s.status == MasterStatus::Optimal);
  CHECK(s.theta == kNegInf);
  CHECK(s.y == master.feasible().front());
  CHECK(s.y == BinaryAssignment{0, 1, 0, 0, 0});

  master.add_cut(plain_cut(0.0, {1, 1, 1, 1, 1}));
  s = solve_master(master);
  CHECK(s.theta == 1.0);
  int support = 0;
  for (std::size_t i = 0; i < 5; ++i) support += s.y[i];
  CHECK(support == 1);
}

TEST_CASE("partial fixing") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  MasterState master(inst);
  master.add_cut(plain_cut(2.0, {3, -1, 0.5, -2, 1}));
  CHECK(solve_master_partial(master, {{0, 1}, {1, 1}}).status == MasterStatus::Infeasible);
  const MasterSolution full = solve_master(master);
  const MasterSolution none = solve_master_partial(master, {});
  CHECK(none.y == full.y);
  CHECK(none.theta == full.theta);
  std::map<std::size_t, int> fix{{0, full.y[0]}, {3, full.y[3]}};
  CHECK(solve_master_partial(master, fix).theta == full.theta);
}

TEST_CASE("enumeration agrees with branch and bound on random cut sets") {
  const MinlpInstance inst = build_case_study({5, 8, 6, 10, 6});
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 5.0);
  std::uniform_int_distribution<int> ncuts(1, 8);
  for (int t = 0; t < 100; ++t) {
    MasterState master(inst);
    const int k = ncuts(rng);
    for (int c = 0; c < k; ++c) master.add_cut(plain_cut(nd(rng), {nd(rng), nd(rng), nd(rng), nd(rng), nd(rng)}));
    const MasterSolution a = solve_master(master);
    const MasterSolution b = solve_master_branch_and_bound(master);
    CHECK(a.status == b.status);
    CHECK(a.theta == doctest::Approx(b.theta).epsilon(1e-12));
    CHECK(master.theta(b.y) == doctest::Approx(a.theta).epsilon(1e-12));
    std::map<std::size_t, int> fix{{4, 0}};
    CHECK(solve_master_partial(master, fix).theta ==
          doctest::Approx(solve_master_branch_and_bound(master, fix).theta).epsilon(1e-12));
  }
}

TEST_CASE("gap test") {
  GbdOptions opt;
  opt.tol = 1e-3;
  CHECK_FALSE(gap_closed(kPosInf, 1.0, opt));
  CHECK_FALSE(gap_closed(100.0, kNegInf, opt));
  CHECK(gap_closed(100.0, 99.95, opt));
  CHECK_FALSE(gap_closed(100.0, 99.8, opt));
  opt.gap_mode = GapMode::Absolute;
  CHECK_FALSE(gap_closed(100.0, 99.95, opt));
  CHECK(gap_closed(100.0, 99.9995, opt));
}

TEST_CASE("classical decomposition recovers the reference optimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MinlpInstance inst = sample_instance(seed);
    const ReferenceSolution ref = reference_solve(inst);
    const SolveReport r = run_classical_gbd(inst);
    REQUIRE(r.optimal());
    CHECK(std::abs(r.objective - ref.Z) <= 1e-4 * std::max(1.0, std::abs(ref.Z)));
    CHECK(r.iterations >= 1);
    CHECK(r.iterations <= 12);
    REQUIRE(r.ubd_trace.size() == r.lbd_trace.size());
    for (std::size_t k = 1; k < r.ubd_trace.size(); ++k) {
      CHECK(r.ubd_trace[k] <= r.ubd_trace[k - 1]);
      CHECK(r.lbd_trace[k] >= r.lbd_trace[k - 1] - 1e-9);
    }
    for (std::size_t k = 0; k < r.ubd_trace.size(); ++k) {
      if (std::isfinite(r.ubd_trace[k])) CHECK(r.lbd_trace[k] <= r.ubd_trace[k] + 1e-3 * std::abs(r.ubd_trace[k]));
    }
  }
}
