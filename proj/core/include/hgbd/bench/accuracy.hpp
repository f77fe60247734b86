#pragma once

#include <functional>

#include <json.hpp>

#include "hgbd/bench/benchmark.hpp"

namespace hgbd::bench {

/// y -> predicted primal-dual point.
using Predictor = std::function<kinn::KinnPoint(const BinaryAssignment&)>;

struct AccuracyRow {
  std::string set;  // "visited" or "all"
  std::size_t points = 0;
  double nrmse_primal = 0.0;
  double nrmse_dual = 0.0;
  MeanStd stationarity, primal_feasibility, complementarity;
};

struct AccuracyTable {
  AccuracyRow visited;  // every y visited by the kinn-only runs, with multiplicity
  AccuracyRow all;      // each feasible y once
};

/**
 * RMSE over all entries of a variable group, divided by the range of the
 * exact values in that group.  A zero range leaves the RMSE unnormalized.
 */
double nrmse(const std::vector<Vector>& predicted, const std::vector<Vector>& exact);

/// Compares predictions with exact solves at the given assignments.
AccuracyRow accuracy_row(const MinlpInstance& inst, const std::vector<BinaryAssignment>& ys,
                         const Predictor& predict, const std::string& set, const IpmOptions& ipm = {});

/**
 * Table of surrogate accuracy.  The visited set comes from kinn-only runs on
 * sample_instance(seed).  Constraints do not depend on the seed, so exact
 * solutions are computed on the first instance.
 */
AccuracyTable kinn_accuracy_report(const kinn::KinnModel& model, const std::vector<std::uint64_t>& seeds,
                                   const VariantConfig& cfg);
AccuracyTable kinn_accuracy_report(const Predictor& predict, const MinlpInstance& inst,
                                   const std::vector<BinaryAssignment>& visited, const IpmOptions& ipm = {});

nlohmann::json accuracy_json(const AccuracyTable& t);
std::string accuracy_csv(const AccuracyTable& t);

}  // namespace hgbd::bench
