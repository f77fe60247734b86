#include "hgbd/kinn/loss.hpp"

#include <cmath>
#include <optional>

namespace hgbd::kinn {

ExprLowering::ExprLowering(nn::Tape& t, std::vector<nn::Var> x_columns)
    : t_(t), x_(std::move(x_columns)), batch_(x_.empty() ? 1 : x_.front().rows()) {}

nn::Var ExprLowering::constant(double v) { return t_.constant(nn::Tensor(batch_, 1, v)); }

nn::Var ExprLowering::lower(const Expr& e) {
  if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
  nn::Var out;
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      out = constant(e.constant_value());
      break;
    case K::Variable:
      if (e.variable_index() >= x_.size()) throw DimensionError("expression references x beyond n");
      out = x_[e.variable_index()];
      break;
    case K::Affine: {
      bool first = true;
      for (const auto& [i, c] : e.affine_terms()) {
        if (i >= x_.size()) throw DimensionError("expression references x beyond n");
        nn::Var term = c == 1.0 ? x_[i] : nn::scale(x_[i], c);
        out = first ? term : nn::add(out, term);
        first = false;
      }
      if (first) {
        out = constant(e.affine_offset());
      } else if (e.affine_offset() != 0.0) {
        out = nn::add_scalar(out, e.affine_offset());
      }
      break;
    }
    case K::Sum: {
      const auto& ch = e.children();
      out = lower(ch.front());
      for (std::size_t k = 1; k < ch.size(); ++k) out = nn::add(out, lower(ch[k]));
      break;
    }
    case K::Product: {
      const auto& ch = e.children();
      out = lower(ch.front());
      for (std::size_t k = 1; k < ch.size(); ++k) {
        if (ch[k].is_constant()) {
          out = nn::scale(out, ch[k].constant_value());
        } else {
          out = nn::mul(out, lower(ch[k]));
        }
      }
      break;
    }
    case K::Exp:
      out = nn::exp(lower(e.children().front()));
      break;
    case K::Log:
      out = nn::log(lower(e.children().front()));
      break;
    case K::Negate:
      out = nn::neg(lower(e.children().front()));
      break;
    case K::MaxZero:
      out = nn::relu(lower(e.children().front()));
      break;
    case K::Step:
      out = nn::heaviside(lower(e.children().front()));
      break;
    case K::Reciprocal:
      out = nn::reciprocal(lower(e.children().front()));
      break;
  }
  memo_.emplace(e.id(), out);
  return out;
}

void KinnLossWeights::validate() const {
  if (!(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && eps > 0.0)) {
    throw std::invalid_argument("loss weights and smoothing must be positive");
  }
}

LossComponents values(const KinnLossTerms& t) {
  return {t.total.value().item(), t.stationarity.value().item(), t.primal.value().item(),
          t.complementarity.value().item()};
}

namespace {

// Accumulates a sum of B x 1 columns; nullopt while empty.
struct ColumnSum {
  std::optional<nn::Var> acc;
  void add(nn::Var v) { acc = acc ? nn::add(*acc, v) : v; }
};

}  // namespace

KinnLossTerms kkt_loss(nn::Tape& t, const MinlpInstance& inst, const nn::Tensor& y, nn::Var x, nn::Var mu,
                       const nn::Var* lambda, const KinnLossWeights& w) {
  w.validate();
  const std::size_t n = inst.n();
  const std::size_t q = inst.q();
  const std::size_t p = inst.p();
  const std::size_t bsz = y.rows();
  const auto& fu = inst.finite_upper();
  if (y.cols() != inst.m() || x.rows() != bsz || x.cols() != n || mu.rows() != bsz ||
      mu.cols() != inst.inequality_count()) {
    throw nn::ShapeError("kkt_loss: input shapes do not match the instance");
  }
  if (p > 0 && (lambda == nullptr || lambda->cols() != p || lambda->rows() != bsz)) {
    throw nn::ShapeError("kkt_loss: equality multipliers missing or misshaped");
  }

  std::vector<nn::Var> xc;
  for (std::size_t j = 0; j < n; ++j) xc.push_back(nn::column(x, j));
  ExprLowering low(t, xc);
  std::vector<nn::Var> mc;
  for (std::size_t i = 0; i < mu.cols(); ++i) mc.push_back(nn::column(mu, i));
  std::vector<nn::Var> lc;
  for (std::size_t i = 0; i < p; ++i) lc.push_back(nn::column(*lambda, i));

  // Coupling terms B y and A y per sample.
  auto coupling = [&](const Matrix& M, std::size_t row) {
    nn::Tensor c(bsz, 1);
    for (std::size_t s = 0; s < bsz; ++s) {
      double v = 0.0;
      for (std::size_t k = 0; k < inst.m(); ++k) v += M(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) * y(s, k);
      c[s] = v;
    }
    return c;
  };

  // Stationarity.
  ColumnSum stat;
  std::vector<std::size_t> upper_slot(n, static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < fu.size(); ++k) upper_slot[fu[k]] = q + n + k;
  for (std::size_t j = 0; j < n; ++j) {
    ColumnSum r;
    const Expr& df = inst.f_derivatives().grad[j];
    if (!df.is_zero()) r.add(low.lower(df));
    for (std::size_t i = 0; i < q; ++i) {
      const Expr& dg = inst.g_derivatives()[i].grad[j];
      if (dg.is_zero()) continue;
      r.add(dg.is_constant() ? nn::scale(mc[i], dg.constant_value()) : nn::mul(mc[i], low.lower(dg)));
    }
    for (std::size_t i = 0; i < p; ++i) {
      const Expr& dh = inst.h_derivatives()[i].grad[j];
      if (dh.is_zero()) continue;
      r.add(dh.is_constant() ? nn::scale(lc[i], dh.constant_value()) : nn::mul(lc[i], low.lower(dh)));
    }
    r.add(nn::neg(mc[q + j]));
    if (upper_slot[j] != static_cast<std::size_t>(-1)) r.add(mc[upper_slot[j]]);
    stat.add(nn::square(*r.acc));
  }

  // Primal feasibility and complementarity.
  ColumnSum pri;
  ColumnSum comp;
  for (std::size_t i = 0; i < q; ++i) {
    nn::Var gi = nn::add(low.lower(inst.g()[i]), t.constant(coupling(inst.B(), i)));
    pri.add(nn::square(nn::relu(gi)));
    comp.add(nn::square(fischer_burmeister(mc[i], nn::neg(gi), w.eps)));
  }
  for (std::size_t i = 0; i < p; ++i) {
    nn::Var hi = nn::add(low.lower(inst.h()[i]), t.constant(coupling(inst.A(), i)));
    pri.add(nn::square(hi));
  }
  const Vector& lo = inst.lower();
  const Vector& up = inst.upper();
  for (std::size_t j = 0; j < n; ++j) {
    nn::Var s = nn::add_scalar(xc[j], -lo[static_cast<Eigen::Index>(j)]);
    pri.add(nn::square(nn::relu(nn::neg(s))));
    comp.add(nn::square(fischer_burmeister(mc[q + j], s, w.eps)));
  }
  for (std::size_t k = 0; k < fu.size(); ++k) {
    const std::size_t j = fu[k];
    nn::Var s = nn::add_scalar(nn::neg(xc[j]), up[static_cast<Eigen::Index>(j)]);
    pri.add(nn::square(nn::relu(nn::neg(s))));
    comp.add(nn::square(fischer_burmeister(mc[q + n + k], s, w.eps)));
  }

  KinnLossTerms out;
  out.stationarity = nn::mean(*stat.acc);
  out.primal = nn::mean(*pri.acc);
  out.complementarity = nn::mean(*comp.acc);
  out.total = nn::add(nn::add(nn::scale(out.stationarity, w.alpha), nn::scale(out.primal, w.beta)),
                      nn::scale(out.complementarity, w.gamma));
  return out;
}

LossComponents kkt_loss_at(const MinlpInstance& inst, const BinaryAssignment& y, const Vector& x,
                           const Vector& mu, const Vector& lambda, const KinnLossWeights& w) {
  nn::Tape t;
  auto row = [](const Vector& v) {
    return nn::Tensor(1, static_cast<std::size_t>(v.size()), std::vector<double>(v.data(), v.data() + v.size()));
  };
  nn::Tensor yt(1, y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yt[i] = y[i];
  nn::Var xv = t.constant(row(x));
  nn::Var mv = t.constant(row(mu));
  nn::Var lv;
  const nn::Var* lp = nullptr;
  if (inst.p() > 0) {
    lv = t.constant(row(lambda));
    lp = &lv;
  }
  return values(kkt_loss(t, inst, yt, xv, mv, lp, w));
}

}  // namespace hgbd::kinn
