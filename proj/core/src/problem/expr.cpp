#include "hgbd/problem/expr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace hgbd {

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant value or Affine offset
  std::size_t var = 0;
  std::vector<Expr> children;
  std::vector<std::pair<std::size_t, double>> terms;  // Affine, sorted by index
};

namespace {

using Terms = std::vector<std::pair<std::size_t, double>>;

Terms normalize_terms(Terms terms) {
  std::map<std::size_t, double> merged;
  for (const auto& [idx, coeff] : terms) merged[idx] += coeff;
  Terms out;
  out.reserve(merged.size());
  for (const auto& [idx, coeff] : merged) {
    if (coeff != 0.0) out.emplace_back(idx, coeff);
  }
  return out;
}

bool is_affine_like(const Expr& e) {
  return e.kind() == Expr::Kind::Constant || e.kind() == Expr::Kind::Variable ||
         e.kind() == Expr::Kind::Affine;
}

// Constant + terms view of an affine-like expression.
std::pair<double, Terms> as_affine(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return {e.constant_value(), {}};
    case Expr::Kind::Variable:
      return {0.0, {{e.variable_index(), 1.0}}};
    default:
      return {e.affine_offset(), e.affine_terms()};
  }
}

}  // namespace

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Constant;
  node->value = value;
  node_ = std::move(node);
}

Expr Expr::constant(double value) { return Expr(value); }

Expr Expr::variable(std::size_t index) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Variable;
  node->var = index;
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr Expr::affine(double c0, Terms terms) {
  terms = normalize_terms(std::move(terms));
  if (terms.empty()) return Expr(c0);
  if (c0 == 0.0 && terms.size() == 1 && terms.front().second == 1.0) {
    return variable(terms.front().first);
  }
  auto node = std::make_shared<Node>();
  node->kind = Kind::Affine;
  node->value = c0;
  node->terms = std::move(terms);
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return is_constant() && node_->value == 0.0; }
double Expr::constant_value() const { return node_->value; }
std::size_t Expr::variable_index() const { return node_->var; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
double Expr::affine_offset() const { return node_->value; }
const Terms& Expr::affine_terms() const { return node_->terms; }

namespace {

Expr make_node(Expr::Kind kind, std::vector<Expr> children);

}  // namespace

// The node factory needs access to the private constructor.
struct ExprFactory {
  static Expr make(Expr::Kind kind, std::vector<Expr> children) {
    auto node = std::make_shared<Expr::Node>();
    node->kind = kind;
    node->children = std::move(children);
    return Expr(std::shared_ptr<const Expr::Node>(std::move(node)));
  }
};

namespace {

Expr make_node(Expr::Kind kind, std::vector<Expr> children) {
  return ExprFactory::make(kind, std::move(children));
}

}  // namespace

Expr sum(std::vector<Expr> terms) {
  double offset = 0.0;
  Terms linear;
  std::vector<Expr> nonlinear;
  std::vector<Expr> stack(terms.rbegin(), terms.rend());
  while (!stack.empty()) {
    Expr t = std::move(stack.back());
    stack.pop_back();
    if (t.kind() == Expr::Kind::Sum) {
      const auto& ch = t.children();
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    } else if (is_affine_like(t)) {
      auto [c, tt] = as_affine(t);
      offset += c;
      linear.insert(linear.end(), tt.begin(), tt.end());
    } else {
      nonlinear.push_back(std::move(t));
    }
  }
  Expr lin = Expr::affine(offset, std::move(linear));
  if (nonlinear.empty()) return lin;
  if (!lin.is_zero()) nonlinear.insert(nonlinear.begin(), lin);
  if (nonlinear.size() == 1) return nonlinear.front();
  return make_node(Expr::Kind::Sum, std::move(nonlinear));
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }

Expr operator-(const Expr& a) {
  if (is_affine_like(a)) {
    auto [c, terms] = as_affine(a);
    for (auto& t : terms) t.second = -t.second;
    return Expr::affine(-c, std::move(terms));
  }
  if (a.kind() == Expr::Kind::Negate) return a.children().front();
  return make_node(Expr::Kind::Negate, {a});
}

Expr operator-(const Expr& a, const Expr& b) { return sum({a, -b}); }

Expr operator*(const Expr& a, const Expr& b) {
  double scale = 1.0;
  std::vector<Expr> factors;
  for (const Expr* f : {&a, &b}) {
    if (f->is_constant()) {
      scale *= f->constant_value();
    } else if (f->kind() == Expr::Kind::Product) {
      for (const auto& c : f->children()) {
        if (c.is_constant()) {
          scale *= c.constant_value();
        } else {
          factors.push_back(c);
        }
      }
    } else {
      factors.push_back(*f);
    }
  }
  if (scale == 0.0 || factors.empty()) return Expr(factors.empty() ? scale : 0.0);
  if (factors.size() == 1) {
    const Expr& only = factors.front();
    if (scale == 1.0) return only;
    if (is_affine_like(only)) {
      auto [c, terms] = as_affine(only);
      for (auto& t : terms) t.second *= scale;
      return Expr::affine(c * scale, std::move(terms));
    }
    if (scale == -1.0) return -only;
  }
  if (scale != 1.0) factors.insert(factors.begin(), Expr(scale));
  return make_node(Expr::Kind::Product, std::move(factors));
}

Expr exp(const Expr& a) {
  if (a.is_constant()) return Expr(std::exp(a.constant_value()));
  return make_node(Expr::Kind::Exp, {a});
}

Expr log(const Expr& a) {
  if (a.is_constant() && a.constant_value() > 0.0) return Expr(std::log(a.constant_value()));
  return make_node(Expr::Kind::Log, {a});
}

Expr max_zero(const Expr& a) {
  if (a.is_constant()) return Expr(std::max(0.0, a.constant_value()));
  return make_node(Expr::Kind::MaxZero, {a});
}

Expr step(const Expr& a) {
  if (a.is_constant()) return Expr(a.constant_value() > 0.0 ? 1.0 : 0.0);
  return make_node(Expr::Kind::Step, {a});
}

Expr reciprocal(const Expr& a) {
  if (a.is_constant() && a.constant_value() != 0.0) return Expr(1.0 / a.constant_value());
  if (a.kind() == Expr::Kind::Reciprocal) return a.children().front();
  return make_node(Expr::Kind::Reciprocal, {a});
}

double Expr::eval(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Variable:
      return x[n.var];
    case Kind::Affine: {
      double v = n.value;
      for (const auto& [idx, coeff] : n.terms) v += coeff * x[idx];
      return v;
    }
    case Kind::Sum: {
      double v = 0.0;
      for (const auto& c : n.children) v += c.eval(x);
      return v;
    }
    case Kind::Product: {
      double v = 1.0;
      for (const auto& c : n.children) v *= c.eval(x);
      return v;
    }
    case Kind::Exp:
      return std::exp(n.children[0].eval(x));
    case Kind::Log: {
      const double u = n.children[0].eval(x);
      if (!(u > 0.0)) {
        throw DomainError("log of nonpositive argument " + std::to_string(u));
      }
      return std::log(u);
    }
    case Kind::Negate:
      return -n.children[0].eval(x);
    case Kind::MaxZero:
      return std::max(0.0, n.children[0].eval(x));
    case Kind::Step:
      return n.children[0].eval(x) > 0.0 ? 1.0 : 0.0;
    case Kind::Reciprocal: {
      const double u = n.children[0].eval(x);
      if (u == 0.0) throw DomainError("reciprocal of zero");
      return 1.0 / u;
    }
  }
  return 0.0;
}

Expr Expr::diff(std::size_t v) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return Expr(0.0);
    case Kind::Variable:
      return Expr(n.var == v ? 1.0 : 0.0);
    case Kind::Affine: {
      for (const auto& [idx, coeff] : n.terms) {
        if (idx == v) return Expr(coeff);
      }
      return Expr(0.0);
    }
    case Kind::Sum: {
      std::vector<Expr> parts;
      parts.reserve(n.children.size());
      for (const auto& c : n.children) parts.push_back(c.diff(v));
      return hgbd::sum(std::move(parts));
    }
    case Kind::Product: {
      std::vector<Expr> parts;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        Expr di = n.children[i].diff(v);
        if (di.is_zero()) continue;
        Expr term = di;
        for (std::size_t j = 0; j < n.children.size(); ++j) {
          if (j != i) term = term * n.children[j];
        }
        parts.push_back(term);
      }
      return hgbd::sum(std::move(parts));
    }
    case Kind::Exp:
      return *this * n.children[0].diff(v);
    case Kind::Log:
      return n.children[0].diff(v) * reciprocal(n.children[0]);
    case Kind::Negate:
      return -n.children[0].diff(v);
    case Kind::MaxZero:
      return step(n.children[0]) * n.children[0].diff(v);
    case Kind::Step:
      return Expr(0.0);
    case Kind::Reciprocal: {
      Expr du = n.children[0].diff(v);
      if (du.is_zero()) return Expr(0.0);
      return -(du * *this * *this);
    }
  }
  return Expr(0.0);
}

std::size_t Expr::arity() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return 0;
    case Kind::Variable:
      return n.var + 1;
    case Kind::Affine:
      return n.terms.empty() ? 0 : n.terms.back().first + 1;
    default: {
      std::size_t a = 0;
      for (const auto& c : n.children) a = std::max(a, c.arity());
      return a;
    }
  }
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  std::ostringstream os;
  auto join = [&](const char* sep) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) os << sep;
      os << n.children[i].to_string();
    }
  };
  switch (n.kind) {
    case Kind::Constant:
      os << n.value;
      break;
    case Kind::Variable:
      os << "x" << n.var;
      break;
    case Kind::Affine:
      os << "(" << n.value;
      for (const auto& [idx, coeff] : n.terms) os << " + " << coeff << "*x" << idx;
      os << ")";
      break;
    case Kind::Sum:
      os << "(";
      join(" + ");
      os << ")";
      break;
    case Kind::Product:
      os << "(";
      join(" * ");
      os << ")";
      break;
    case Kind::Exp:
      os << "exp(" << n.children[0].to_string() << ")";
      break;
    case Kind::Log:
      os << "log(" << n.children[0].to_string() << ")";
      break;
    case Kind::Negate:
      os << "-(" << n.children[0].to_string() << ")";
      break;
    case Kind::MaxZero:
      os << "max0(" << n.children[0].to_string() << ")";
      break;
    case Kind::Step:
      os << "step(" << n.children[0].to_string() << ")";
      break;
    case Kind::Reciprocal:
      os << "1/(" << n.children[0].to_string() << ")";
      break;
  }
  return os.str();
}

std::vector<Expr> gradient(const Expr& e, std::size_t n) {
  std::vector<Expr> g;
  g.reserve(n);
  for (std::size_t i = 0; i < n; ++i) g.push_back(e.diff(i));
  return g;
}

}  // namespace hgbd
