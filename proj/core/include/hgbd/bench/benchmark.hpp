#pragma once

#include <filesystem>
#include <functional>

#include <json.hpp>

#include "hgbd/bench/variants.hpp"

namespace hgbd::bench {

struct MeanStd {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(const std::vector<double>& v);

struct VariantSummary {
  Variant variant = Variant::Classical;
  int runs = 0;
  int failures = 0;    // excluded from the aggregates below
  int recovered = 0;   // objective within recovery_tol of the reference
  MeanStd t_total_ms, t_master_ms, t_sub_ms, iterations, fallback_calls;
  // fallback_calls / iterations over all successful runs
  double fallback_rate = 0.0;
  // 100 * (classical - this) / classical on mean times; NaN without a classical row
  double reduction_total_pct = std::numeric_limits<double>::quiet_NaN();
  double reduction_master_pct = std::numeric_limits<double>::quiet_NaN();
  double reduction_sub_pct = std::numeric_limits<double>::quiet_NaN();
  double recovery_rate() const { return runs - failures > 0 ? double(recovered) / (runs - failures) : 0.0; }
};

struct BenchmarkTable {
  std::vector<VariantSummary> rows;
  std::vector<SolveReport> runs;
};

struct BenchmarkConfig {
  VariantConfig variant;
  double recovery_tol = 1e-4;
};

/// Aggregates finished runs; rows follow the order of `variants`.
BenchmarkTable aggregate(std::vector<SolveReport> runs, const std::vector<Variant>& variants,
                         double recovery_tol = 1e-4);

/**
 * Runs every variant on sample_instance(seed) for each seed, in order,
 * single-threaded.  A run that throws becomes a row with status "failed".
 */
BenchmarkTable benchmark(const std::vector<std::uint64_t>& seeds, const std::vector<Variant>& variants,
                         const Models& models, const BenchmarkConfig& cfg,
                         const std::function<void(const SolveReport&)>& on_run = {});

std::string summary_csv(const BenchmarkTable& t, bool include_timing = true);
nlohmann::json summary_json(const BenchmarkTable& t, bool include_timing = true);

/// Writes summary.csv, runs.csv and runs.json into `dir`.
void write_benchmark(const std::filesystem::path& dir, const BenchmarkTable& t, bool include_timing = true);

}  // namespace hgbd::bench
