#include "hgbd/bench/variants.hpp"

#include <cmath>

#include "hgbd/kinn/train.hpp"

namespace hgbd::bench {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Classical:
      return "classical";
    case Variant::AgentOnly:
      return "agent-only";
    case Variant::KinnOnly:
      return "kinn-only";
    case Variant::Hybrid:
      return "hybrid";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : all_variants()) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown variant '" + s + "' (classical, agent-only, kinn-only, hybrid)");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::Classical, Variant::AgentOnly, Variant::KinnOnly, Variant::Hybrid};
  return v;
}

bool needs_actor(Variant v) { return v == Variant::AgentOnly || v == Variant::Hybrid; }
bool needs_kinn(Variant v) { return v == Variant::KinnOnly || v == Variant::Hybrid; }

bool within_relative(double a, double b, double tol) {
  return std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

SolveReport run_variant(const MinlpInstance& inst, Variant v, const Models& models, const VariantConfig& cfg,
                        double reference) {
  if (needs_actor(v) && models.actor == nullptr) {
    throw MissingModel(to_string(v) + " needs a trained policy checkpoint");
  }
  if (needs_kinn(v) && models.kinn == nullptr) {
    throw MissingModel(to_string(v) + " needs a trained surrogate checkpoint");
  }
  cfg.thresholds.validate();

  ExactMasterOracle exact_master;
  ExactSubproblemOracle exact_sub(cfg.gbd.ipm);
  std::optional<rl::AgentMasterOracle> agent;
  std::optional<kinn::KinnSubproblemOracle> surrogate;
  if (needs_actor(v)) agent.emplace(*models.actor, cfg.thresholds);
  if (needs_kinn(v)) surrogate.emplace(*models.kinn, cfg.feas_tol, cfg.exact_ubd_refresh, cfg.gbd.ipm);

  MasterOracle& master = agent ? static_cast<MasterOracle&>(*agent) : exact_master;
  SubproblemOracle& sub = surrogate ? static_cast<SubproblemOracle&>(*surrogate) : exact_sub;
  SolveReport r = run_gbd(inst, master, sub, cfg.gbd, to_string(v));
  r.reference = reference;
  return r;
}

}  // namespace hgbd::bench
