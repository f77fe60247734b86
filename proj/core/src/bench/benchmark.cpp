#include "hgbd/bench/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hgbd/nlp/ipm.hpp"

namespace hgbd::bench {

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return s;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stdev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return s;
}

namespace {

double reduction(double base, double v) {
  if (!(base > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (base - v) / base;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json ms_json(const MeanStd& s) { return {{"mean", num(s.mean)}, {"std", num(s.stdev)}}; }

}  // namespace

BenchmarkTable aggregate(std::vector<SolveReport> runs, const std::vector<Variant>& variants, double recovery_tol) {
  BenchmarkTable t;
  for (Variant v : variants) {
    VariantSummary s;
    s.variant = v;
    std::vector<double> tt, tm, ts, it, fb;
    double fb_sum = 0.0;
    double it_sum = 0.0;
    for (const auto& r : runs) {
      if (r.variant != to_string(v)) continue;
      ++s.runs;
      if (r.status == "failed") {
        ++s.failures;
        continue;
      }
      if (r.optimal() && within_relative(r.objective, r.reference, recovery_tol)) ++s.recovered;
      tt.push_back(r.t_total_ms);
      tm.push_back(r.t_master_ms);
      ts.push_back(r.t_sub_ms);
      it.push_back(r.iterations);
      fb.push_back(r.fallback_calls);
      fb_sum += r.fallback_calls;
      it_sum += r.iterations;
    }
    s.t_total_ms = mean_std(tt);
    s.t_master_ms = mean_std(tm);
    s.t_sub_ms = mean_std(ts);
    s.iterations = mean_std(it);
    s.fallback_calls = mean_std(fb);
    s.fallback_rate = it_sum > 0.0 ? fb_sum / it_sum : 0.0;
    t.rows.push_back(s);
  }
  const VariantSummary* base = nullptr;
  for (const auto& s : t.rows) {
    if (s.variant == Variant::Classical && s.runs > s.failures) base = &s;
  }
  if (base != nullptr) {
    for (auto& s : t.rows) {
      s.reduction_total_pct = reduction(base->t_total_ms.mean, s.t_total_ms.mean);
      s.reduction_master_pct = reduction(base->t_master_ms.mean, s.t_master_ms.mean);
      s.reduction_sub_pct = reduction(base->t_sub_ms.mean, s.t_sub_ms.mean);
    }
  }
  t.runs = std::move(runs);
  return t;
}

BenchmarkTable benchmark(const std::vector<std::uint64_t>& seeds, const std::vector<Variant>& variants,
                         const Models& models, const BenchmarkConfig& cfg,
                         const std::function<void(const SolveReport&)>& on_run) {
  if (seeds.empty()) throw std::invalid_argument("benchmark needs at least one seed");
  for (Variant v : variants) {
    if (needs_actor(v) && models.actor == nullptr) throw MissingModel(to_string(v) + " needs a policy checkpoint");
    if (needs_kinn(v) && models.kinn == nullptr) throw MissingModel(to_string(v) + " needs a surrogate checkpoint");
  }
  std::vector<SolveReport> runs;
  for (std::uint64_t seed : seeds) {
    const MinlpInstance inst = sample_instance(seed);
    double ref = std::numeric_limits<double>::quiet_NaN();
    try {
      ref = reference_solve(inst, cfg.variant.gbd.ipm).Z;
    } catch (const std::exception&) {
      // runs still happen; they just cannot count as recovered
    }
    for (Variant v : variants) {
      SolveReport r;
      try {
        r = run_variant(inst, v, models, cfg.variant, ref);
      } catch (const MissingModel&) {
        throw;
      } catch (const std::exception& e) {
        r = SolveReport{};
        r.variant = to_string(v);
        r.seed = seed;
        r.coefficients = inst.coefficients();
        r.status = "failed";
        r.message = e.what();
        r.objective = std::numeric_limits<double>::quiet_NaN();
        r.reference = ref;
      }
      if (on_run) on_run(r);
      runs.push_back(std::move(r));
    }
  }
  return aggregate(std::move(runs), variants, cfg.recovery_tol);
}

std::string summary_csv(const BenchmarkTable& t, bool include_timing) {
  std::ostringstream os;
  os << "variant,runs,failures,recovered,iterations_mean,iterations_std,fallback_calls_mean,fallback_rate";
  if (include_timing) {
    os << ",t_total_ms_mean,t_total_ms_std,t_master_ms_mean,t_master_ms_std,t_sub_ms_mean,t_sub_ms_std"
          ",reduction_total_pct,reduction_master_pct,reduction_sub_pct";
  }
  os << "\n";
  for (const auto& s : t.rows) {
    os << to_string(s.variant) << ',' << s.runs << ',' << s.failures << ',' << s.recovered << ','
       << fmt(s.iterations.mean) << ',' << fmt(s.iterations.stdev) << ',' << fmt(s.fallback_calls.mean) << ','
       << fmt(s.fallback_rate);
    if (include_timing) {
      os << ',' << fmt(s.t_total_ms.mean) << ',' << fmt(s.t_total_ms.stdev) << ',' << fmt(s.t_master_ms.mean) << ','
         << fmt(s.t_master_ms.stdev) << ',' << fmt(s.t_sub_ms.mean) << ',' << fmt(s.t_sub_ms.stdev) << ','
         << fmt(s.reduction_total_pct) << ',' << fmt(s.reduction_master_pct) << ',' << fmt(s.reduction_sub_pct);
    }
    os << "\n";
  }
  return os.str();
}

nlohmann::json summary_json(const BenchmarkTable& t, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : t.rows) {
    nlohmann::json j{{"variant", to_string(s.variant)},
                     {"runs", s.runs},
                     {"failures", s.failures},
                     {"recovered", s.recovered},
                     {"recovery_rate", s.recovery_rate()},
                     {"iterations", ms_json(s.iterations)},
                     {"fallback_calls", ms_json(s.fallback_calls)},
                     {"fallback_rate", s.fallback_rate}};
    if (include_timing) {
      j["t_total_ms"] = ms_json(s.t_total_ms);
      j["t_master_ms"] = ms_json(s.t_master_ms);
      j["t_sub_ms"] = ms_json(s.t_sub_ms);
      j["reduction_pct"] = {{"total", num(s.reduction_total_pct)},
                            {"master", num(s.reduction_master_pct)},
                            {"sub", num(s.reduction_sub_pct)}};
    }
    rows.push_back(j);
  }
  return {{"rows", rows}};
}

void write_benchmark(const std::filesystem::path& dir, const BenchmarkTable& t, bool include_timing) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("summary.csv");
    f << summary_csv(t, include_timing);
  }
  {
    auto f = open("runs.csv");
    f << report_csv_header() << "\n";
    for (const auto& r : t.runs) f << report_csv_row(r, include_timing) << "\n";
  }
  {
    auto f = open("runs.json");
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : t.runs) runs.push_back(report_to_json(r, include_timing));
    nlohmann::json j = summary_json(t, include_timing);
    j["runs"] = runs;
    f << j.dump(1) << "\n";
  }
}

}  // namespace hgbd::bench
