#include "hgbd/bench/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hgbd/nlp/ipm.hpp"

namespace hgbd::bench {

double nrmse(const std::vector<Vector>& predicted, const std::vector<Vector>& exact) {
  if (predicted.size() != exact.size()) throw DimensionError("nrmse: point counts differ");
  double ss = 0.0;
  std::size_t count = 0;
  double lo = kPosInf;
  double hi = kNegInf;
  for (std::size_t k = 0; k < exact.size(); ++k) {
    if (predicted[k].size() != exact[k].size()) throw DimensionError("nrmse: vector sizes differ");
    ss += (predicted[k] - exact[k]).squaredNorm();
    count += static_cast<std::size_t>(exact[k].size());
    if (exact[k].size() > 0) {
      lo = std::min(lo, exact[k].minCoeff());
      hi = std::max(hi, exact[k].maxCoeff());
    }
  }
  if (count == 0) return 0.0;
  const double rmse = std::sqrt(ss / static_cast<double>(count));
  const double range = hi - lo;
  return range > 0.0 ? rmse / range : rmse;
}

namespace {

Vector duals(const Vector& mu, const Vector& lambda) {
  Vector d(mu.size() + lambda.size());
  d << mu, lambda;
  return d;
}

}  // namespace

AccuracyRow accuracy_row(const MinlpInstance& inst, const std::vector<BinaryAssignment>& ys,
                         const Predictor& predict, const std::string& set, const IpmOptions& ipm) {
  AccuracyRow row;
  row.set = set;
  row.points = ys.size();
  std::map<BinaryAssignment, SubproblemSolution> exact;
  std::vector<Vector> px, ex, pd, ed;
  std::vector<double> st, pr, cp;
  for (const auto& y : ys) {
    auto it = exact.find(y);
    if (it == exact.end()) {
      SubproblemSolution s = solve_subproblem(inst, y, ipm);
      if (s.status != SolveStatus::Optimal) {
        throw SubproblemFailure("reference solve failed at y=" + y.to_string(), y, s.status);
      }
      it = exact.emplace(y, std::move(s)).first;
    }
    const kinn::KinnPoint pt = predict(y);
    px.push_back(pt.x);
    ex.push_back(it->second.x);
    pd.push_back(duals(pt.mu, pt.lambda));
    ed.push_back(duals(it->second.mu, it->second.lambda));
    const ResidualTriple r = kkt_residuals(inst, y, pt.x, pt.lambda, pt.mu);
    st.push_back(r.stationarity);
    pr.push_back(r.primal_feasibility);
    cp.push_back(r.complementarity);
  }
  row.nrmse_primal = nrmse(px, ex);
  row.nrmse_dual = nrmse(pd, ed);
  row.stationarity = mean_std(st);
  row.primal_feasibility = mean_std(pr);
  row.complementarity = mean_std(cp);
  return row;
}

AccuracyTable kinn_accuracy_report(const Predictor& predict, const MinlpInstance& inst,
                                   const std::vector<BinaryAssignment>& visited, const IpmOptions& ipm) {
  AccuracyTable t;
  t.visited = accuracy_row(inst, visited, predict, "visited", ipm);
  t.all = accuracy_row(inst, enumerate_feasible_assignments(inst), predict, "all", ipm);
  return t;
}

AccuracyTable kinn_accuracy_report(const kinn::KinnModel& model, const std::vector<std::uint64_t>& seeds,
                                   const VariantConfig& cfg) {
  if (seeds.empty()) throw std::invalid_argument("accuracy report needs at least one seed");
  Models models;
  models.kinn = &model;
  std::vector<BinaryAssignment> visited;
  for (std::uint64_t s : seeds) {
    const SolveReport r = run_variant(sample_instance(s), Variant::KinnOnly, models, cfg);
    visited.insert(visited.end(), r.visited.begin(), r.visited.end());
  }
  const MinlpInstance inst = sample_instance(seeds.front());
  return kinn_accuracy_report([&](const BinaryAssignment& y) { return model.predict(y); }, inst, visited,
                              cfg.gbd.ipm);
}

namespace {

nlohmann::json row_json(const AccuracyRow& r) {
  auto ms = [](const MeanStd& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.stdev}}; };
  return {{"set", r.set},
          {"points", r.points},
          {"nrmse_primal", r.nrmse_primal},
          {"nrmse_dual", r.nrmse_dual},
          {"stationarity", ms(r.stationarity)},
          {"primal_feasibility", ms(r.primal_feasibility)},
          {"complementarity", ms(r.complementarity)}};
}

}  // namespace

nlohmann::json accuracy_json(const AccuracyTable& t) { return {{"visited", row_json(t.visited)}, {"all", row_json(t.all)}}; }

std::string accuracy_csv(const AccuracyTable& t) {
  std::ostringstream os;
  os.precision(6);
  os << "set,points,nrmse_primal,nrmse_dual,stationarity_mean,stationarity_std,primal_mean,primal_std,"
        "complementarity_mean,complementarity_std\n";
  for (const AccuracyRow* r : {&t.visited, &t.all}) {
    os << r->set << ',' << r->points << ',' << r->nrmse_primal << ',' << r->nrmse_dual << ','
       << r->stationarity.mean << ',' << r->stationarity.stdev << ',' << r->primal_feasibility.mean << ','
       << r->primal_feasibility.stdev << ',' << r->complementarity.mean << ',' << r->complementarity.stdev << "\n";
  }
  return os.str();
}

}  // namespace hgbd::bench
