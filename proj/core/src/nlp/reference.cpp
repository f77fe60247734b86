#include "hgbd/nlp/ipm.hpp"

namespace hgbd {

ReferenceSolution reference_solve(const MinlpInstance& inst, const IpmOptions& options) {
  const auto candidates = enumerate_feasible_assignments(inst);
  if (candidates.empty()) throw std::runtime_error("no pure-binary feasible assignment");
  SubproblemSolver solver(options);
  ReferenceSolution best;
  bool have = false;
  for (const auto& y : candidates) {
    SubproblemSolution sol = solver.solve(inst, y);
    if (sol.status != SolveStatus::Optimal) {
      throw SubproblemFailure("subproblem failed at y=" + y.to_string() + " (" +
                                  to_string(sol.status) + ")",
                              y, sol.status);
    }
    // Strict comparison keeps the lexicographically smallest minimizer.
    if (!have || sol.Z < best.Z) {
      best = {y, sol.x, sol.Z};
      have = true;
    }
  }
  return best;
}

}  // namespace hgbd
