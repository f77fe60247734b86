#include "hgbd/problem/instance.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

namespace hgbd {

BinaryAssignment::BinaryAssignment(std::vector<int> bits) : bits_(std::move(bits)) {
  for (int b : bits_) {
    if (b != 0 && b != 1) throw std::invalid_argument("binary assignment entries must be 0 or 1");
  }
}

BinaryAssignment::BinaryAssignment(std::initializer_list<int> bits)
    : BinaryAssignment(std::vector<int>(bits)) {}

void BinaryAssignment::set(std::size_t i, int value) {
  if (value != 0 && value != 1) throw std::invalid_argument("binary assignment entries must be 0 or 1");
  bits_.at(i) = value;
}

Vector BinaryAssignment::to_vector() const {
  Vector v(static_cast<Eigen::Index>(bits_.size()));
  for (std::size_t i = 0; i < bits_.size(); ++i) v[static_cast<Eigen::Index>(i)] = bits_[i];
  return v;
}

std::string BinaryAssignment::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (i) s += ",";
    s += bits_[i] ? '1' : '0';
  }
  return s + ")";
}

FunctionDerivatives differentiate(const Expr& fn, std::size_t n) {
  FunctionDerivatives d;
  d.grad = gradient(fn, n);
  d.linear = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (d.grad[i].is_constant()) continue;
    for (std::size_t j = i; j < n; ++j) {
      Expr hij = d.grad[i].diff(j);
      if (hij.is_zero()) continue;
      d.hessian.push_back({i, j, std::move(hij)});
      d.linear = false;
    }
  }
  return d;
}

MinlpInstance::MinlpInstance(MinlpData data) : data_(std::move(data)) {
  const auto n = static_cast<Eigen::Index>(data_.n);
  const auto m = static_cast<Eigen::Index>(data_.m);
  const auto p = static_cast<Eigen::Index>(data_.h.size());
  const auto q = static_cast<Eigen::Index>(data_.g.size());
  if (data_.e.size() != m) throw DimensionError("cost vector e must have length m");
  if (p == 0 && data_.A.size() == 0) data_.A = Matrix::Zero(0, m);
  if (q == 0 && data_.B.size() == 0) data_.B = Matrix::Zero(0, m);
  if (data_.A.rows() != p || data_.A.cols() != m) throw DimensionError("A must be p x m");
  if (data_.B.rows() != q || data_.B.cols() != m) throw DimensionError("B must be q x m");
  if (data_.K.size() == 0) data_.K = Matrix::Zero(0, m);
  if (data_.K.cols() != m) throw DimensionError("K must have m columns");
  if (data_.b.size() != data_.K.rows()) throw DimensionError("b must have one entry per row of K");
  if (data_.equality.empty()) data_.equality.assign(static_cast<std::size_t>(data_.K.rows()), false);
  if (static_cast<Eigen::Index>(data_.equality.size()) != data_.K.rows()) {
    throw DimensionError("equality mask must match the rows of K");
  }
  if (data_.lower.size() != n || data_.upper.size() != n) throw DimensionError("bounds must have length n");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(data_.lower[i] <= data_.upper[i])) throw std::invalid_argument("lower bound exceeds upper bound");
    if (!std::isfinite(data_.lower[i])) throw std::invalid_argument("lower bounds must be finite");
    if (std::isfinite(data_.upper[i])) finite_upper_.push_back(static_cast<std::size_t>(i));
  }
  auto check_arity = [&](const Expr& fn, const char* what) {
    if (fn.arity() > data_.n) throw DimensionError(std::string(what) + " references x beyond n");
  };
  check_arity(data_.f, "f");
  for (const auto& fn : data_.h) check_arity(fn, "h");
  for (const auto& fn : data_.g) check_arity(fn, "g");
  if (!data_.g_names.empty() && data_.g_names.size() != data_.g.size()) {
    throw DimensionError("g_names must label every g row");
  }

  f_deriv_ = differentiate(data_.f, data_.n);
  for (const auto& fn : data_.g) g_deriv_.push_back(differentiate(fn, data_.n));
  for (const auto& fn : data_.h) h_deriv_.push_back(differentiate(fn, data_.n));
}

namespace {

void check_dims(const MinlpInstance& inst, const Vector& x, const BinaryAssignment& y) {
  if (static_cast<std::size_t>(x.size()) != inst.n()) throw DimensionError("x has wrong length");
  if (y.size() != inst.m()) throw DimensionError("y has wrong length");
}

std::span<const double> as_span(const Vector& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

}  // namespace

double evaluate_objective(const MinlpInstance& inst, const Vector& x, const BinaryAssignment& y) {
  check_dims(inst, x, y);
  return inst.f().eval(as_span(x)) + inst.e().dot(y.to_vector());
}

ConstraintValues evaluate_constraints(const MinlpInstance& inst, const Vector& x,
                                      const BinaryAssignment& y) {
  check_dims(inst, x, y);
  const Vector yv = y.to_vector();
  ConstraintValues out;
  out.h = inst.A() * yv;
  for (std::size_t i = 0; i < inst.p(); ++i) out.h[static_cast<Eigen::Index>(i)] += inst.h()[i].eval(as_span(x));
  out.g = inst.B() * yv;
  for (std::size_t i = 0; i < inst.q(); ++i) out.g[static_cast<Eigen::Index>(i)] += inst.g()[i].eval(as_span(x));
  out.pure = inst.K() * yv - inst.b();
  return out;
}

bool pure_binary_feasible(const MinlpInstance& inst, const BinaryAssignment& y, double tol) {
  if (y.size() != inst.m()) throw DimensionError("y has wrong length");
  const Vector r = inst.K() * y.to_vector() - inst.b();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (inst.equality()[static_cast<std::size_t>(i)] ? std::abs(r[i]) > tol : r[i] > tol) return false;
  }
  return true;
}

std::vector<BinaryAssignment> enumerate_feasible_assignments(const MinlpInstance& inst,
                                                             std::size_t cap) {
  const std::size_t m = inst.m();
  if (m > cap) {
    throw CapExceededError("enumeration cap exceeded: m=" + std::to_string(m) +
                           " > cap=" + std::to_string(cap));
  }
  std::vector<BinaryAssignment> out;
  const std::uint64_t count = std::uint64_t{1} << m;
  BinaryAssignment y(m);
  for (std::uint64_t code = 0; code < count; ++code) {
    // y[0] is the most significant bit, so increasing codes are lexicographic.
    for (std::size_t i = 0; i < m; ++i) y.set(i, static_cast<int>((code >> (m - 1 - i)) & 1U));
    if (pure_binary_feasible(inst, y)) out.push_back(y);
  }
  return out;
}

MinlpInstance build_case_study(const CaseStudyCoefficients& c, std::optional<std::uint64_t> seed) {
  for (std::size_t i = 0; i < 5; ++i) {
    const int hi = i < 4 ? kCaseStudyCMax : kCaseStudyC5Max;
    if (c[i] < 1 || c[i] > hi) {
      std::cerr << "warning: case-study coefficient c" << (i + 1) << "=" << c[i]
                << " outside sampling range [1," << hi << "]\n";
    }
  }
  // x = (x3, x5, x9, x11, x13, x16)
  enum : std::size_t { X3, X5, X9, X11, X13, X16 };
  const Expr x3 = Expr::variable(X3), x5 = Expr::variable(X5);
  const Expr flow = Expr::affine(1.0, {{X11, 1.0}, {X13, 1.0}});  // x11 + x13 + 1
  const Expr exp3 = exp(x3);
  const Expr exp5 = exp(Expr::affine(0.0, {{X5, 1.0 / 1.2}}));

  MinlpData d;
  d.n = 6;
  d.m = 5;
  d.f = sum({Expr::affine(140.0, {{X3, -10.0}, {X5, -15.0}, {X9, -15.0}, {X11, 15.0}, {X13, 5.0}, {X16, -20.0}}),
             exp3, exp5, Expr(-60.0) * log(flow)});
  d.e = Vector(5);
  for (int i = 0; i < 5; ++i) d.e[i] = c[static_cast<std::size_t>(i)];

  const double U = kCaseStudyBigM;
  d.g = {
      -log(flow),                                                                      // E2
      Expr::affine(0.0, {{X3, -1.0}, {X5, -1.0}, {X9, -2.0}, {X11, 1.0}, {X16, 2.0}}),   // E3
      Expr::affine(0.0, {{X3, -1.0}, {X5, -1.0}, {X9, -0.75}, {X11, 1.0}, {X16, 2.0}}),  // E4
      Expr::affine(0.0, {{X9, 1.0}, {X16, -1.0}}),                                      // E5
      Expr::affine(0.0, {{X9, 2.0}, {X11, -1.0}, {X16, -2.0}}),                         // E6
      Expr::affine(0.0, {{X11, -0.5}, {X13, 1.0}}),                                     // E7
      Expr::affine(0.0, {{X11, 0.2}, {X13, -1.0}}),                                     // E8
      exp3 - Expr(1.0),                                                                 // E9
      exp5 - Expr(1.0),                                                                 // E10
      Expr::affine(0.0, {{X9, 1.25}}),                                                  // E11
      Expr::affine(0.0, {{X11, 1.0}, {X13, 1.0}}),                                      // E12
      Expr::affine(0.0, {{X9, -2.0}, {X16, 2.0}}),                                      // E13
  };
  d.g_names = {"E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E11", "E12", "E13"};
  d.B = Matrix::Zero(12, 5);
  for (int i = 0; i < 5; ++i) d.B(7 + i, i) = -U;  // E9..E13 couple to y1..y5

  d.K = Matrix::Zero(2, 5);
  d.K(0, 0) = 1.0;  // E14: y1 + y2 = 1
  d.K(0, 1) = 1.0;
  d.K(1, 3) = 1.0;  // E15: y4 + y5 <= 1
  d.K(1, 4) = 1.0;
  d.b = Vector::Ones(2);
  d.equality = {true, false};

  const double inf = std::numeric_limits<double>::infinity();
  d.lower = Vector::Zero(6);
  d.upper = Vector(6);
  d.upper << 2.0, 2.0, 2.0, inf, inf, 3.0;
  d.coefficients = c;
  d.seed = seed;
  return MinlpInstance(std::move(d));
}

CaseStudyCoefficients sample_coefficients(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> wide(1, kCaseStudyCMax);
  std::uniform_int_distribution<int> narrow(1, kCaseStudyC5Max);
  CaseStudyCoefficients c{};
  for (std::size_t i = 0; i < 4; ++i) c[i] = wide(rng);
  c[4] = narrow(rng);
  return c;
}

MinlpInstance sample_instance(std::uint64_t seed) {
  return build_case_study(sample_coefficients(seed), seed);
}

nlohmann::json instance_to_json(const MinlpInstance& inst) {
  if (!inst.coefficients()) throw std::invalid_argument("only case-study instances serialize to JSON");
  nlohmann::json j;
  j["family"] = "floudas_e1";
  j["c"] = *inst.coefficients();
  if (inst.seed()) {
    j["seed"] = *inst.seed();
  } else {
    j["seed"] = nullptr;
  }
  return j;
}

MinlpInstance instance_from_json(const nlohmann::json& j) {
  if (j.at("family").get<std::string>() != "floudas_e1") {
    throw std::invalid_argument("unknown instance family: " + j.at("family").dump());
  }
  const auto& jc = j.at("c");
  if (!jc.is_array() || jc.size() != 5) throw std::invalid_argument("\"c\" must hold 5 integers");
  CaseStudyCoefficients c{};
  for (std::size_t i = 0; i < 5; ++i) c[i] = jc[i].get<int>();
  std::optional<std::uint64_t> seed;
  if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
  return build_case_study(c, seed);
}

std::string canonical_instance_string(const MinlpInstance& inst) {
  return instance_to_json(inst).dump();
}

}  // namespace hgbd
