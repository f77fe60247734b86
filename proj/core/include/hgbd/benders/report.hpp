#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgbd/problem/instance.hpp"

namespace hgbd {

/// Outcome and bookkeeping of one decomposition run.
struct SolveReport {
  std::string variant = "classical";
  std::optional<std::uint64_t> seed;
  std::optional<CaseStudyCoefficients> coefficients;
  std::string status = "optimal";  // optimal | max-iter | no-incumbent | failed
  std::string message;

  double objective = 0.0;
  double reference = std::numeric_limits<double>::quiet_NaN();
  BinaryAssignment y;
  Vector x;

  int iterations = 0;
  int subproblem_calls = 0;    // exact NLP solves or surrogate predictions
  int nlp_iterations = 0;      // summed Newton iterations (time proxy)
  int master_solver_calls = 0; // exact / partially fixed master solves
  int fallback_calls = 0;      // iterations that needed any master solver
  int regime_full = 0;
  int regime_partial = 0;
  int regime_none = 0;

  double t_total_ms = 0.0;
  double t_master_ms = 0.0;  // master decision incl. policy inference
  double t_sub_ms = 0.0;     // subproblem solve or surrogate cut construction
  double t_verify_ms = 0.0;  // policy + verification overhead within t_master_ms
  double t_surrogate_ms = 0.0;  // surrogate cut construction within t_sub_ms
  int exact_refresh_calls = 0;  // exact NLP solves made for UBD values by a surrogate run

  std::vector<double> ubd_trace;
  std::vector<double> lbd_trace;  // LBD for exact masters, CLBD otherwise
  std::vector<BinaryAssignment> visited;

  double rel_gap() const;
  bool optimal() const { return status == "optimal"; }
};

nlohmann::json report_to_json(const SolveReport& r, bool include_timing = true);

/// Fixed column order of the per-run CSV.
const std::vector<std::string>& report_csv_columns();
std::string report_csv_header();
std::string report_csv_row(const SolveReport& r, bool include_timing = true);

}  // namespace hgbd
