#include <benchmark/benchmark.h>

#include "hgbd/kinn/train.hpp"
#include "hgbd/rl/verify.hpp"

using namespace hgbd;

namespace {

MasterState master_with_cuts(const MinlpInstance& inst, std::size_t count) {
  MasterState m(inst);
  const auto ys = enumerate_feasible_assignments(inst);
  for (std::size_t k = 0; k < count && k < ys.size(); ++k) m.add_cut(build_cut(inst, ys[k], solve_subproblem(inst, ys[k])));
  return m;
}

}  // namespace

static void BM_SubproblemSolve(benchmark::State& state) {
  const MinlpInstance inst = sample_instance(0);
  const auto ys = enumerate_feasible_assignments(inst);
  SubproblemSolver solver;
  std::size_t k = 0;
  for (auto _ : state) {
    auto s = solver.solve(inst, ys[k++ % ys.size()]);
    benchmark::DoNotOptimize(s.Z);
  }
}
BENCHMARK(BM_SubproblemSolve);

static void BM_MasterEnumeration(benchmark::State& state) {
  const MinlpInstance inst = sample_instance(0);
  const MasterState m = master_with_cuts(inst, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_master(m).theta);
}
BENCHMARK(BM_MasterEnumeration)->Arg(1)->Arg(6)->Arg(12);

static void BM_MasterBranchAndBound(benchmark::State& state) {
  const MinlpInstance inst = sample_instance(0);
  const MasterState m = master_with_cuts(inst, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_master_branch_and_bound(m).theta);
}
BENCHMARK(BM_MasterBranchAndBound)->Arg(1)->Arg(6)->Arg(12);

static void BM_SurrogateCut(benchmark::State& state) {
  const MinlpInstance inst = sample_instance(0);
  const kinn::KinnModel model(inst, {}, 0);
  const auto ys = enumerate_feasible_assignments(inst);
  std::size_t k = 0;
  for (auto _ : state) {
    auto c = kinn::predict_cut(model, inst, ys[k++ % ys.size()], 1e-4);
    benchmark::DoNotOptimize(c.cut.constant);
  }
}
BENCHMARK(BM_SurrogateCut);

static void BM_ActorForward(benchmark::State& state) {
  const MinlpInstance inst = sample_instance(0);
  const MasterState m = master_with_cuts(inst, static_cast<std::size_t>(state.range(0)));
  const rl::BipartiteGraph g = rl::encode_master_graph(m, BinaryAssignment{1, 0, 1, 0, 1}, rl::ubd_scale(150.0));
  rl::Actor actor(rl::PolicyConfig{}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(actor.probabilities(g));
}
BENCHMARK(BM_ActorForward)->Arg(1)->Arg(6)->Arg(12);

BENCHMARK_MAIN();
