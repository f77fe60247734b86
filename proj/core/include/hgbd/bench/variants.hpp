#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hgbd/benders/gbd.hpp"
#include "hgbd/kinn/kinn.hpp"
#include "hgbd/rl/verify.hpp"

namespace hgbd::bench {

enum class Variant { Classical, AgentOnly, KinnOnly, Hybrid };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);  // throws std::invalid_argument
const std::vector<Variant>& all_variants();
bool needs_actor(Variant v);
bool needs_kinn(Variant v);

/// Trained models a variant may need; not owned.
struct Models {
  rl::Actor* actor = nullptr;
  const kinn::KinnModel* kinn = nullptr;
};

struct VariantConfig {
  GbdOptions gbd;
  rl::Thresholds thresholds;
  double feas_tol = 1e-4;
  // Exact NLP solve for the UBD value when a surrogate prediction fails the
  // feasibility gate.  Without it the gated UBD almost never updates.
  bool exact_ubd_refresh = true;
};

class MissingModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * classical:  exact master, exact subproblem.
 * agent-only: actor + verification for the master, exact subproblem.
 * kinn-only:  exact master, surrogate cuts.
 * hybrid:     actor + verification, surrogate cuts.
 * `reference`, when finite, is copied into the report.
 */
SolveReport run_variant(const MinlpInstance& inst, Variant v, const Models& models, const VariantConfig& cfg,
                        double reference = std::numeric_limits<double>::quiet_NaN());

/// |a - b| <= tol * max(1, |b|).
bool within_relative(double a, double b, double tol);

}  // namespace hgbd::bench
