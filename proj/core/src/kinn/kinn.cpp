#include "hgbd/kinn/kinn.hpp"

#include <cmath>

#include "hgbd/nn/checkpoint.hpp"

namespace hgbd::kinn {

double fischer_burmeister(double a, double b, double eps) { return a + b - std::sqrt(a * a + b * b + eps * eps); }

nn::Var fischer_burmeister(nn::Var a, nn::Var b, double eps) {
  nn::Var r = nn::sqrt(nn::add_scalar(nn::add(nn::square(a), nn::square(b)), eps * eps));
  return nn::sub(nn::add(a, b), r);
}

KinnLayout KinnLayout::from_instance(const MinlpInstance& inst) {
  KinnLayout l;
  l.n = inst.n();
  l.m = inst.m();
  l.p = inst.p();
  l.q = inst.q();
  for (std::size_t i = 0; i < inst.q(); ++i) {
    const bool coupled = inst.B().row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() > 0.0;
    (coupled ? l.db1_rows : l.db2_rows).push_back(i);
  }
  l.finite_upper = inst.finite_upper();
  l.lower = inst.lower();
  l.upper = inst.upper();
  for (Eigen::Index j = 0; j < l.lower.size(); ++j) {
    if (!std::isfinite(l.lower[j])) throw DimensionError("surrogate needs finite lower bounds");
  }
  return l;
}

std::size_t KinnLayout::db2_target(std::size_t k) const {
  if (k < db2_rows.size()) return db2_rows[k];
  return q + (k - db2_rows.size());
}

KinnModel::KinnModel(KinnLayout layout, KinnConfig cfg, std::uint64_t seed)
    : layout_(std::move(layout)), cfg_(cfg), seed_(seed) {
  std::mt19937_64 rng(seed);
  using nn::Activation;
  const std::size_t w = cfg.trunk_width;
  const std::size_t h = cfg.branch_width;
  t1_ = nn::Dense("trunk.0", layout_.m, w, Activation::ReLU, rng);
  t2_ = nn::Dense("trunk.1", w, w, Activation::ReLU, rng);
  pb1_ = nn::Dense("pb.0", w, h, Activation::ReLU, rng);
  pb2_ = nn::Dense("pb.1", h, layout_.n, Activation::Identity, rng);
  d1a_ = nn::Dense("db1.0", w, h, Activation::ReLU, rng);
  d1b_ = nn::Dense("db1.1", h, layout_.db1_width(), Activation::Identity, rng);
  d2a_ = nn::Dense("db2.0", w, h, Activation::ReLU, rng);
  d2b_ = nn::Dense("db2.1", h, layout_.db2_width(), Activation::Identity, rng);
  if (layout_.p > 0) lam_ = nn::Dense("lambda", w, layout_.p, Activation::Identity, rng);
}

nn::Var KinnModel::trunk(nn::Tape& t, nn::Var y) {
  if (y.cols() != layout_.m) throw nn::ShapeError("surrogate input width differs from m");
  return t2_.forward(t, t1_.forward(t, y));
}

nn::Var KinnModel::map_primal(nn::Tape&, nn::Var raw) const {
  std::vector<nn::Var> cols;
  for (std::size_t j = 0; j < layout_.n; ++j) {
    const double lo = layout_.lower[static_cast<Eigen::Index>(j)];
    const double up = layout_.upper[static_cast<Eigen::Index>(j)];
    nn::Var r = nn::column(raw, j);
    cols.push_back(std::isfinite(up) ? nn::add_scalar(nn::scale(nn::sigmoid(r), up - lo), lo)
                                     : nn::add_scalar(nn::softplus(r), lo));
  }
  return nn::concat_cols(cols);
}

nn::Var KinnModel::assemble_mu(nn::Tape&, nn::Var db1, nn::Var db2) const {
  std::vector<nn::Var> cols(layout_.mu_width());
  for (std::size_t k = 0; k < layout_.db1_rows.size(); ++k) cols[layout_.db1_rows[k]] = nn::column(db1, k);
  for (std::size_t k = 0; k < layout_.db2_width(); ++k) cols[layout_.db2_target(k)] = nn::column(db2, k);
  return nn::concat_cols(cols);
}

nn::Var KinnModel::primal_from_trunk(nn::Tape& t, nn::Var trunk_out) {
  return map_primal(t, pb2_.forward(t, pb1_.forward(t, trunk_out)));
}

KinnOutputs KinnModel::heads(nn::Tape& t, nn::Var trunk_out, bool with_primal) {
  KinnOutputs o;
  if (with_primal) o.x = primal_from_trunk(t, trunk_out);
  nn::Var db1 = nn::softplus(d1b_.forward(t, d1a_.forward(t, trunk_out)));
  nn::Var db2 = nn::softplus(d2b_.forward(t, d2a_.forward(t, trunk_out)));
  o.mu = assemble_mu(t, db1, db2);
  if (layout_.p > 0) {
    o.lambda = lam_.forward(t, trunk_out);
    o.has_lambda = true;
  }
  return o;
}

KinnOutputs KinnModel::forward(nn::Tape& t, nn::Var y) { return heads(t, trunk(t, y), true); }

nn::Tensor KinnModel::infer_trunk(const nn::Tensor& y) const { return t2_.infer(t1_.infer(y)); }

nn::Tensor KinnModel::infer_primal(const nn::Tensor& trunk_out) const {
  nn::Tensor raw = pb2_.infer(pb1_.infer(trunk_out));
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (std::size_t j = 0; j < layout_.n; ++j) {
      const double lo = layout_.lower[static_cast<Eigen::Index>(j)];
      const double up = layout_.upper[static_cast<Eigen::Index>(j)];
      const double v = raw(r, j);
      raw(r, j) = std::isfinite(up) ? lo + (up - lo) * nn::sigmoid_value(v) : lo + nn::softplus_value(v);
    }
  }
  return raw;
}

KinnPoint KinnModel::predict(const BinaryAssignment& y) const {
  if (y.size() != layout_.m) throw DimensionError("assignment length differs from m");
  nn::Tensor in(1, layout_.m);
  for (std::size_t i = 0; i < layout_.m; ++i) in[i] = y[i];
  const nn::Tensor tr = infer_trunk(in);
  const nn::Tensor x = infer_primal(tr);
  const nn::Tensor db1 = nn::activate(d1b_.infer(d1a_.infer(tr)), nn::Activation::Softplus);
  const nn::Tensor db2 = nn::activate(d2b_.infer(d2a_.infer(tr)), nn::Activation::Softplus);
  KinnPoint pt;
  pt.x = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(layout_.n));
  pt.mu = Vector(static_cast<Eigen::Index>(layout_.mu_width()));
  for (std::size_t k = 0; k < layout_.db1_rows.size(); ++k) pt.mu[static_cast<Eigen::Index>(layout_.db1_rows[k])] = db1[k];
  for (std::size_t k = 0; k < layout_.db2_width(); ++k) pt.mu[static_cast<Eigen::Index>(layout_.db2_target(k))] = db2[k];
  pt.lambda = Vector::Zero(static_cast<Eigen::Index>(layout_.p));
  if (layout_.p > 0) {
    const nn::Tensor lam = lam_.infer(tr);
    for (std::size_t k = 0; k < layout_.p; ++k) pt.lambda[static_cast<Eigen::Index>(k)] = lam[k];
  }
  return pt;
}

std::vector<nn::Parameter*> KinnModel::trunk_params() {
  auto a = t1_.params();
  for (auto* p : t2_.params()) a.push_back(p);
  return a;
}

std::vector<nn::Parameter*> KinnModel::primal_params() {
  auto a = pb1_.params();
  for (auto* p : pb2_.params()) a.push_back(p);
  return a;
}

std::vector<nn::Parameter*> KinnModel::dual_params() {
  std::vector<nn::Parameter*> a;
  for (nn::Dense* d : {&d1a_, &d1b_, &d2a_, &d2b_}) {
    for (auto* p : d->params()) a.push_back(p);
  }
  if (layout_.p > 0) {
    for (auto* p : lam_.params()) a.push_back(p);
  }
  return a;
}

std::vector<nn::Parameter*> KinnModel::params() {
  auto a = trunk_params();
  for (auto* p : primal_params()) a.push_back(p);
  for (auto* p : dual_params()) a.push_back(p);
  return a;
}

void KinnModel::zero_dual_outputs() {
  d1b_.zero_output();
  d2b_.zero_output();
}

nlohmann::json KinnModel::architecture() const {
  return {{"type", "kinn"},
          {"n", layout_.n},
          {"m", layout_.m},
          {"p", layout_.p},
          {"q", layout_.q},
          {"trunk_width", cfg_.trunk_width},
          {"branch_width", cfg_.branch_width},
          {"branches",
           {{"trunk", 2}, {"PB", layout_.n}, {"DB1", layout_.db1_width()}, {"DB2", layout_.db2_width()}}}};
}

nn::Tensor assignments_to_tensor(const std::vector<BinaryAssignment>& ys) {
  if (ys.empty()) return {};
  nn::Tensor t(ys.size(), ys.front().size());
  for (std::size_t r = 0; r < ys.size(); ++r)
    for (std::size_t c = 0; c < ys[r].size(); ++c) t(r, c) = ys[r][c];
  return t;
}

void save_kinn(const std::filesystem::path& path, KinnModel& model, const nlohmann::json& meta) {
  nn::save_checkpoint(path, model.params(), model.architecture(), model.seed(),
                      meta.is_null() ? nlohmann::json::object() : meta);
}

KinnModel load_kinn(const std::filesystem::path& path, const MinlpInstance& inst) {
  const auto header = nn::read_checkpoint_header(path);
  const auto& arch = header.at("architecture");
  if (arch.value("type", "") != "kinn") throw nn::CheckpointError(path.string() + " is not a surrogate checkpoint");
  KinnConfig cfg;
  cfg.trunk_width = arch.at("trunk_width").get<std::size_t>();
  cfg.branch_width = arch.at("branch_width").get<std::size_t>();
  KinnModel model(inst, cfg, header.at("seed").get<std::uint64_t>());
  if (model.architecture() != arch) throw nn::CheckpointError("checkpoint architecture does not match the instance");
  nn::load_checkpoint(path, model.params());
  return model;
}

}  // namespace hgbd::kinn
