#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hgbd/bench/pipeline.hpp"

namespace hgbd::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  bench::TrainingBudget budget;
  std::uint64_t seed = 0;
  std::vector<int> only;                  // empty runs all ten
  std::optional<std::filesystem::path> artifacts;  // CSV / JSON outputs
  std::ostream* log = nullptr;            // progress notes
};

/// Runs the acceptance criteria in order.  Trained models are built once
/// and shared between the criteria that need them.
std::vector<CriterionResult> run_suite(const SuiteOptions& opt,
                                       const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

}  // namespace hgbd::acceptance
