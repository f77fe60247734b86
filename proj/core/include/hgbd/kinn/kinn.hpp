#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "hgbd/nn/layers.hpp"
#include "hgbd/problem/instance.hpp"

namespace hgbd::kinn {

/// phi_eps(a, b) = a + b - sqrt(a^2 + b^2 + eps^2).
double fischer_burmeister(double a, double b, double eps);
nn::Var fischer_burmeister(nn::Var a, nn::Var b, double eps);

/**
 * Output layout derived from the problem.  DB1 carries the duals of g rows
 * that involve y; DB2 carries the duals of g rows involving only x, then the
 * lower-bound duals, then the finite-upper-bound duals.
 */
struct KinnLayout {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  std::vector<std::size_t> db1_rows;
  std::vector<std::size_t> db2_rows;
  std::vector<std::size_t> finite_upper;
  Vector lower;
  Vector upper;

  static KinnLayout from_instance(const MinlpInstance& inst);
  std::size_t db1_width() const { return db1_rows.size(); }
  std::size_t db2_width() const { return db2_rows.size() + n + finite_upper.size(); }
  std::size_t mu_width() const { return q + n + finite_upper.size(); }
  /// Position in the mu vector [g | lower | finite upper] of DB2 output k.
  std::size_t db2_target(std::size_t k) const;
};

struct KinnConfig {
  std::size_t trunk_width = 64;
  std::size_t branch_width = 128;
};

struct KinnOutputs {
  nn::Var x;       // B x n, inside the variable box
  nn::Var mu;      // B x mu_width, [g | lower | finite upper] order, > 0
  nn::Var lambda;  // B x p (invalid when p == 0)
  bool has_lambda = false;
};

struct KinnPoint {
  Vector x;
  Vector mu;
  Vector lambda;
};

/**
 * Shared trunk (two dense ReLU layers) feeding a primal branch (PB) and two
 * dual branches (DB1, DB2), each one hidden ReLU layer plus a linear output.
 * Dual outputs go through softplus.  Primal outputs are mapped into the
 * box: l + (u - l) sigmoid(r) for finite u, l + softplus(r) otherwise.
 */
class KinnModel {
 public:
  KinnModel() = default;
  KinnModel(KinnLayout layout, KinnConfig cfg, std::uint64_t seed);
  KinnModel(const MinlpInstance& inst, KinnConfig cfg, std::uint64_t seed)
      : KinnModel(KinnLayout::from_instance(inst), cfg, seed) {}

  /// y: B x m.
  KinnOutputs forward(nn::Tape& t, nn::Var y);
  /// Trunk output only (B x trunk_width).
  nn::Var trunk(nn::Tape& t, nn::Var y);
  /// Branches on a given trunk output; `with_primal` false skips PB.
  KinnOutputs heads(nn::Tape& t, nn::Var trunk_out, bool with_primal = true);
  nn::Var primal_from_trunk(nn::Tape& t, nn::Var trunk_out);

  /// Tape-free single-point prediction.
  KinnPoint predict(const BinaryAssignment& y) const;
  /// Tape-free trunk / primal evaluation for a batch, used to cache frozen parts.
  nn::Tensor infer_trunk(const nn::Tensor& y) const;
  nn::Tensor infer_primal(const nn::Tensor& trunk_out) const;

  std::vector<nn::Parameter*> trunk_params();
  std::vector<nn::Parameter*> primal_params();
  std::vector<nn::Parameter*> dual_params();
  std::vector<nn::Parameter*> params();

  const KinnLayout& layout() const { return layout_; }
  const KinnConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  /// Zeroes the output layers of the dual branches (mu = ln 2 everywhere).
  void zero_dual_outputs();

  nlohmann::json architecture() const;

 private:
  nn::Var map_primal(nn::Tape& t, nn::Var raw) const;
  nn::Var assemble_mu(nn::Tape& t, nn::Var db1, nn::Var db2) const;

  KinnLayout layout_;
  KinnConfig cfg_;
  std::uint64_t seed_ = 0;
  nn::Dense t1_, t2_;
  nn::Dense pb1_, pb2_;
  nn::Dense d1a_, d1b_;
  nn::Dense d2a_, d2b_;
  nn::Dense lam_;
};

nn::Tensor assignments_to_tensor(const std::vector<BinaryAssignment>& ys);

void save_kinn(const std::filesystem::path& path, KinnModel& model, const nlohmann::json& meta = {});
/// The instance supplies the layout; the checkpoint must match it.
KinnModel load_kinn(const std::filesystem::path& path, const MinlpInstance& inst);

}  // namespace hgbd::kinn
