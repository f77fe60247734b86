#include "hgbd/benders/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace hgbd {

double SolveReport::rel_gap() const {
  if (!std::isfinite(reference)) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(objective - reference) / std::max(1.0, std::abs(reference));
}

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json trace_json(const std::vector<double>& t) {
  nlohmann::json j = nlohmann::json::array();
  for (double v : t) j.push_back(finite_or_null(v));
  return j;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

nlohmann::json report_to_json(const SolveReport& r, bool include_timing) {
  nlohmann::json j;
  j["variant"] = r.variant;
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  j["c"] = r.coefficients ? nlohmann::json(*r.coefficients) : nlohmann::json(nullptr);
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["objective"] = finite_or_null(r.objective);
  j["reference"] = finite_or_null(r.reference);
  j["rel_gap"] = finite_or_null(r.rel_gap());
  j["y"] = r.y.bits();
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  j["iterations"] = r.iterations;
  j["subproblem_calls"] = r.subproblem_calls;
  j["nlp_iterations"] = r.nlp_iterations;
  j["master_solver_calls"] = r.master_solver_calls;
  j["fallback_calls"] = r.fallback_calls;
  j["exact_refresh_calls"] = r.exact_refresh_calls;
  j["regime"] = {{"full", r.regime_full}, {"partial", r.regime_partial}, {"none", r.regime_none}};
  if (include_timing) {
    j["t_total_ms"] = r.t_total_ms;
    j["t_master_ms"] = r.t_master_ms;
    j["t_sub_ms"] = r.t_sub_ms;
    j["t_verify_ms"] = r.t_verify_ms;
    j["t_surrogate_ms"] = r.t_surrogate_ms;
  }
  j["ubd_trace"] = trace_json(r.ubd_trace);
  j["lbd_trace"] = trace_json(r.lbd_trace);
  nlohmann::json visited = nlohmann::json::array();
  for (const auto& y : r.visited) visited.push_back(y.bits());
  j["visited"] = visited;
  return j;
}

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {
      "variant",    "seed",       "c1",        "c2",        "c3",             "c4",
      "c5",         "objective",  "reference", "rel_gap",   "iterations",     "t_total_ms",
      "t_master_ms", "t_sub_ms",  "fallback_calls", "regime_full", "regime_partial",
      "regime_none", "status"};
  return cols;
}

std::string report_csv_header() {
  std::string s;
  for (const auto& c : report_csv_columns()) {
    if (!s.empty()) s += ",";
    s += c;
  }
  return s;
}

std::string report_csv_row(const SolveReport& r, bool include_timing) {
  std::ostringstream os;
  os << r.variant << "," << (r.seed ? std::to_string(*r.seed) : "");
  for (std::size_t i = 0; i < 5; ++i) {
    os << "," << (r.coefficients ? std::to_string((*r.coefficients)[i]) : "");
  }
  os << "," << fmt(r.objective) << "," << fmt(r.reference) << "," << fmt(r.rel_gap()) << ","
     << r.iterations;
  if (include_timing) {
    os << "," << fmt(r.t_total_ms) << "," << fmt(r.t_master_ms) << "," << fmt(r.t_sub_ms);
  } else {
    os << ",,,";
  }
  os << "," << r.fallback_calls << "," << r.regime_full << "," << r.regime_partial << ","
     << r.regime_none << "," << r.status;
  return os.str();
}

}  // namespace hgbd
