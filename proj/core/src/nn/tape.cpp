#include "hgbd/nn/tape.hpp"

#include <algorithm>
#include <cmath>

namespace hgbd::nn {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, true, nullptr);
  nodes_[v.id].param = &p;
  if (!p.grad.same_shape(p.value)) p.zero_grad();
  return v;
}

Var Tape::push(Tensor value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Tape::grad_ref(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor(n.value.rows(), n.value.cols());
    n.grad_ready = true;
  }
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad_ready) return n.grad;
  return Tensor(n.value.rows(), n.value.cols());
}

void Tape::backward(Var loss) {
  if (nodes_[loss.id].value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " + nodes_[loss.id].value.shape_string());
  }
  for (auto& n : nodes_) {
    n.grad_ready = false;
    n.grad = Tensor();
  }
  grad_ref(loss.id)[0] = 1.0;
  for (std::int64_t id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.grad_ready || !n.requires_grad) continue;
    if (n.param != nullptr) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, static_cast<std::uint32_t>(id));
    }
  }
}

std::map<std::string, Tensor> gradient_map(const std::vector<Parameter*>& params) {
  std::map<std::string, Tensor> out;
  for (const Parameter* p : params) out[p->name] = p->grad;
  return out;
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) throw ShapeError("operands live on different tapes");
  return *a.tape;
}

// Elementwise unary op; df(x, y) is dy/dx given input x and output y.
template <class F, class DF>
Var unary(Var a, F f, DF df) {
  Tape& t = *a.tape;
  const Tensor& x = t.value_ref(a.id);
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const bool rg = t.needs(a.id);
  return t.push(std::move(y), rg, [ia = a.id, df](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    const Tensor& xv = tp.value_ref(ia);
    const Tensor& yv = tp.value_ref(self);
    Tensor& ga = tp.grad_ref(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  Tensor y;
  gemm(t.value_ref(a.id), false, t.value_ref(b.id), false, y);
  const bool rg = t.needs(a.id) || t.needs(b.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = b.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    if (tp.needs(ia)) gemm(g, false, tp.value_ref(ib), true, tp.grad_ref(ia), true);
    if (tp.needs(ib)) gemm(tp.value_ref(ia), true, g, false, tp.grad_ref(ib), true);
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same(t.value_ref(a.id), t.value_ref(b.id), "add");
  Tensor y = t.value_ref(a.id);
  y += t.value_ref(b.id);
  const bool rg = t.needs(a.id) || t.needs(b.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = b.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.grad_ref(ia) += g;
    if (tp.needs(ib)) tp.grad_ref(ib) += g;
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = t.value_ref(a.id);
  const Tensor& bv = t.value_ref(b.id);
  require_same(av, bv, "sub");
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  const bool rg = t.needs(a.id) || t.needs(b.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = b.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.grad_ref(ia) += g;
    if (tp.needs(ib)) {
      Tensor& gb = tp.grad_ref(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = t.value_ref(a.id);
  const Tensor& bv = t.value_ref(b.id);
  require_same(av, bv, "mul");
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const bool rg = t.needs(a.id) || t.needs(b.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = b.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    const Tensor& x = tp.value_ref(ia);
    const Tensor& z = tp.value_ref(ib);
    if (tp.needs(ia)) {
      Tensor& ga = tp.grad_ref(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * z[i];
    }
    if (tp.needs(ib)) {
      Tensor& gb = tp.grad_ref(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
    }
  });
}

Var add_bias(Var a, Var bias) {
  Tape& t = tape_of(a, bias);
  const Tensor& av = t.value_ref(a.id);
  const Tensor& bv = t.value_ref(bias.id);
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError("add_bias: bias " + bv.shape_string() + " does not fit " + av.shape_string());
  }
  Tensor y = av;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bv[c];
  const bool rg = t.needs(a.id) || t.needs(bias.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = bias.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    if (tp.needs(ia)) tp.grad_ref(ia) += g;
    if (tp.needs(ib)) {
      Tensor& gb = tp.grad_ref(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Var mul_col(Var a, Var col) {
  Tape& t = tape_of(a, col);
  const Tensor& av = t.value_ref(a.id);
  const Tensor& cv = t.value_ref(col.id);
  if (cv.cols() != 1 || cv.rows() != av.rows()) {
    throw ShapeError("mul_col: column " + cv.shape_string() + " does not fit " + av.shape_string());
  }
  Tensor y = av;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) *= cv[r];
  const bool rg = t.needs(a.id) || t.needs(col.id);
  return t.push(std::move(y), rg, [ia = a.id, ic = col.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    const Tensor& x = tp.value_ref(ia);
    const Tensor& cvv = tp.value_ref(ic);
    if (tp.needs(ia)) {
      Tensor& ga = tp.grad_ref(ia);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * cvv[r];
    }
    if (tp.needs(ic)) {
      Tensor& gc = tp.grad_ref(ic);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gc[r] += g(r, c) * x(r, c);
    }
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      sigmoid_value, [](double, double y) { return y * (1.0 - y); });
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_value(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Var softplus(Var a) {
  return unary(a, softplus_value, [](double x, double) { return sigmoid_value(x); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  for (double v : a.value().values()) {
    if (!(v > 0.0)) throw DomainViolation("log of nonpositive value " + std::to_string(v));
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  for (double v : a.value().values()) {
    if (v < 0.0) throw DomainViolation("sqrt of negative value " + std::to_string(v));
  }
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var reciprocal(Var a) {
  for (double v : a.value().values()) {
    if (v == 0.0) throw DomainViolation("reciprocal of zero");
  }
  return unary(a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Var heaviside(Var a) {
  Tape& t = *a.tape;
  const Tensor& x = t.value_ref(a.id);
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? 1.0 : 0.0;
  return t.constant(std::move(y));
}

Var minimum(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = t.value_ref(a.id);
  const Tensor& bv = t.value_ref(b.id);
  require_same(av, bv, "minimum");
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::min(av[i], bv[i]);
  const bool rg = t.needs(a.id) || t.needs(b.id);
  return t.push(std::move(y), rg, [ia = a.id, ib = b.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    const Tensor& x = tp.value_ref(ia);
    const Tensor& z = tp.value_ref(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const bool to_a = x[i] <= z[i];
      if (to_a && tp.needs(ia)) tp.grad_ref(ia)[i] += g[i];
      if (!to_a && tp.needs(ib)) tp.grad_ref(ib)[i] += g[i];
    }
  });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  double s = 0.0;
  for (double v : t.value_ref(a.id).values()) s += v;
  return t.push(Tensor::scalar(s), t.needs(a.id), [ia = a.id](Tape& tp, std::uint32_t self) {
    const double g = tp.grad_ref(self)[0];
    Tensor& ga = tp.grad_ref(ia);
    for (auto& v : ga.values()) v += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) {
  Tape& t = *a.tape;
  const Tensor& x = t.value_ref(a.id);
  Tensor y(1, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) y[c] += x(r, c);
  return t.push(std::move(y), t.needs(a.id), [ia = a.id](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    Tensor& ga = tp.grad_ref(ia);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c];
  });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  Tape& t = *a.tape;
  const Tensor& x = t.value_ref(a.id);
  if (start + count > x.cols()) throw ShapeError("slice_cols out of range on " + x.shape_string());
  Tensor y(x.rows(), count);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) y(r, c) = x(r, start + c);
  return t.push(std::move(y), t.needs(a.id), [ia = a.id, start](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    Tensor& ga = tp.grad_ref(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(r, start + c) += g(r, c);
  });
}

Var column(Var a, std::size_t j) { return slice_cols(a, j, 1); }

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  Tape& t = *parts.front().tape;
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool rg = false;
  for (const Var& p : parts) {
    if (p.tape != &t) throw ShapeError("operands live on different tapes");
    if (p.rows() != rows) throw ShapeError("concat_cols row mismatch");
    cols += p.cols();
    rg = rg || t.needs(p.id);
  }
  Tensor y(rows, cols);
  std::vector<std::uint32_t> ids;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& x = t.value_ref(p.id);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) y(r, off + c) = x(r, c);
    off += x.cols();
    ids.push_back(p.id);
  }
  return t.push(std::move(y), rg, [ids = std::move(ids)](Tape& tp, std::uint32_t self) {
    const Tensor& g = tp.grad_ref(self);
    std::size_t o = 0;
    for (std::uint32_t id : ids) {
      const std::size_t w = tp.value_ref(id).cols();
      if (tp.needs(id)) {
        Tensor& gi = tp.grad_ref(id);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < w; ++c) gi(r, c) += g(r, o + c);
      }
      o += w;
    }
  });
}

Var squared_norm(Var a) { return sum(square(a)); }

Var edge_aggregate(Var phi, Var h, const EdgeList& edges) {
  Tape& t = tape_of(phi, h);
  const Tensor& pv = t.value_ref(phi.id);
  const Tensor& hv = t.value_ref(h.id);
  if (pv.rows() != edges.size()) throw ShapeError("edge_aggregate: phi rows differ from edge count");
  if (hv.rows() != edges.num_nodes) throw ShapeError("edge_aggregate: node state rows differ from node count");
  const std::size_t k = pv.cols();
  const std::size_t d = hv.cols();
  std::vector<double> inv_deg(edges.num_nodes, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges.src[e] >= edges.num_nodes || edges.dst[e] >= edges.num_nodes) {
      throw ShapeError("edge_aggregate: edge endpoint out of range");
    }
    inv_deg[edges.dst[e]] += 1.0;
  }
  for (auto& v : inv_deg) v = 1.0 / std::max(1.0, v);

  Tensor y(edges.num_nodes, k * d);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t i = edges.dst[e];
    const std::size_t j = edges.src[e];
    for (std::size_t a = 0; a < k; ++a) {
      const double w = pv(e, a) * inv_deg[i];
      for (std::size_t c = 0; c < d; ++c) y(i, a * d + c) += w * hv(j, c);
    }
  }
  const bool rg = t.needs(phi.id) || t.needs(h.id);
  return t.push(std::move(y), rg,
                [ip = phi.id, ih = h.id, edges, inv_deg = std::move(inv_deg), k, d](Tape& tp, std::uint32_t self) {
                  const Tensor& g = tp.grad_ref(self);
                  const Tensor& p = tp.value_ref(ip);
                  const Tensor& x = tp.value_ref(ih);
                  const bool need_p = tp.needs(ip);
                  const bool need_h = tp.needs(ih);
                  for (std::size_t e = 0; e < edges.size(); ++e) {
                    const std::size_t i = edges.dst[e];
                    const std::size_t j = edges.src[e];
                    for (std::size_t a = 0; a < k; ++a) {
                      if (need_p) {
                        double acc = 0.0;
                        for (std::size_t c = 0; c < d; ++c) acc += g(i, a * d + c) * x(j, c);
                        tp.grad_ref(ip)(e, a) += acc * inv_deg[i];
                      }
                      if (need_h) {
                        const double w = p(e, a) * inv_deg[i];
                        Tensor& gh = tp.grad_ref(ih);
                        for (std::size_t c = 0; c < d; ++c) gh(j, c) += w * g(i, a * d + c);
                      }
                    }
                  }
                });
}

}  // namespace hgbd::nn
