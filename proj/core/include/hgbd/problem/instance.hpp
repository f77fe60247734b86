#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hgbd/problem/expr.hpp"

namespace hgbd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point y in {0,1}^m. Ordered lexicographically with y[0] most significant.
class BinaryAssignment {
 public:
  BinaryAssignment() = default;
  explicit BinaryAssignment(std::size_t m) : bits_(m, 0) {}
  /// Throws std::invalid_argument for entries other than 0/1.
  explicit BinaryAssignment(std::vector<int> bits);
  BinaryAssignment(std::initializer_list<int> bits);

  std::size_t size() const { return bits_.size(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, int value);
  Vector to_vector() const;
  const std::vector<int>& bits() const { return bits_; }
  std::string to_string() const;

  auto operator<=>(const BinaryAssignment&) const = default;
  bool operator==(const BinaryAssignment&) const = default;

 private:
  std::vector<int> bits_;
};

/// Coefficients c1..c5 of the parameterized case-study objective.
using CaseStudyCoefficients = std::array<int, 5>;

/// Plain data used to construct a MinlpInstance.
struct MinlpData {
  std::size_t n = 0;  // continuous variables
  std::size_t m = 0;  // binaries
  Expr f;
  Vector e;
  std::vector<Expr> h;
  Matrix A;  // p x m
  std::vector<Expr> g;
  Matrix B;  // q x m
  Matrix K;  // o x m
  Vector b;  // o
  std::vector<bool> equality;  // per pure-binary row
  Vector lower;
  Vector upper;  // +inf allowed
  std::optional<CaseStudyCoefficients> coefficients;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> g_names;  // optional labels, e.g. "E9"
};

/// Symbolic first and second derivatives of one function of x.
struct FunctionDerivatives {
  std::vector<Expr> grad;  // n entries
  struct HessianEntry {
    std::size_t row, col;  // row <= col
    Expr value;
  };
  std::vector<HessianEntry> hessian;  // structurally nonzero upper triangle
  bool linear = false;
};

/**
 * MINLP with linearly entering binaries:
 *
 *   min f(x) + e'y  s.t.  h(x) + Ay = 0,  g(x) + By <= 0,  Ky - b <= 0
 *                         (rows flagged as equality: Ky - b = 0),
 *                         lower <= x <= upper,  y in {0,1}^m.
 *
 * Immutable after construction; derivative expressions are built once.
 */
class MinlpInstance {
 public:
  explicit MinlpInstance(MinlpData data);

  std::size_t n() const { return data_.n; }
  std::size_t m() const { return data_.m; }
  std::size_t p() const { return data_.h.size(); }
  std::size_t q() const { return data_.g.size(); }
  std::size_t o() const { return static_cast<std::size_t>(data_.K.rows()); }

  const Expr& f() const { return data_.f; }
  const Vector& e() const { return data_.e; }
  const std::vector<Expr>& h() const { return data_.h; }
  const Matrix& A() const { return data_.A; }
  const std::vector<Expr>& g() const { return data_.g; }
  const Matrix& B() const { return data_.B; }
  const Matrix& K() const { return data_.K; }
  const Vector& b() const { return data_.b; }
  const std::vector<bool>& equality() const { return data_.equality; }
  const Vector& lower() const { return data_.lower; }
  const Vector& upper() const { return data_.upper; }
  const std::optional<CaseStudyCoefficients>& coefficients() const { return data_.coefficients; }
  const std::optional<std::uint64_t>& seed() const { return data_.seed; }
  const std::vector<std::string>& g_names() const { return data_.g_names; }

  /// Indices of coordinates with a finite upper bound.
  const std::vector<std::size_t>& finite_upper() const { return finite_upper_; }
  /// Total inequality multipliers: q + n lower bounds + finite upper bounds.
  std::size_t inequality_count() const { return q() + n() + finite_upper_.size(); }

  const FunctionDerivatives& f_derivatives() const { return f_deriv_; }
  const std::vector<FunctionDerivatives>& g_derivatives() const { return g_deriv_; }
  const std::vector<FunctionDerivatives>& h_derivatives() const { return h_deriv_; }

  const MinlpData& data() const { return data_; }

 private:
  MinlpData data_;
  std::vector<std::size_t> finite_upper_;
  FunctionDerivatives f_deriv_;
  std::vector<FunctionDerivatives> g_deriv_;
  std::vector<FunctionDerivatives> h_deriv_;
};

FunctionDerivatives differentiate(const Expr& fn, std::size_t n);

struct ConstraintValues {
  Vector h;     // h(x) + Ay
  Vector g;     // g(x) + By
  Vector pure;  // Ky - b
};

/// f(x) + e'y. Throws DimensionError / DomainError.
double evaluate_objective(const MinlpInstance& inst, const Vector& x, const BinaryAssignment& y);

/// Raw residuals; callers interpret signs.
ConstraintValues evaluate_constraints(const MinlpInstance& inst, const Vector& x,
                                      const BinaryAssignment& y);

/// Pure-binary feasibility (equality rows exact up to tol).
bool pure_binary_feasible(const MinlpInstance& inst, const BinaryAssignment& y, double tol = 1e-9);

class CapExceededError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// All pure-binary feasible y in lexicographic order.
std::vector<BinaryAssignment> enumerate_feasible_assignments(
    const MinlpInstance& inst, std::size_t cap = kDefaultEnumerationCap);

// ---------------------------------------------------------------------------
// Case study: a synthesis-style MINLP with 5 binaries and 6 continuous
// variables ordered x = (x3, x5, x9, x11, x13, x16).

inline constexpr double kCaseStudyBigM = 10.0;
inline constexpr int kCaseStudyCMax = 39;
inline constexpr int kCaseStudyC5Max = 7;

/// Warns on stderr for coefficients outside the sampling ranges; never rejects.
MinlpInstance build_case_study(const CaseStudyCoefficients& c,
                               std::optional<std::uint64_t> seed = std::nullopt);

/// c1..c4 uniform on [1,39], c5 uniform on [1,7]; deterministic per seed.
CaseStudyCoefficients sample_coefficients(std::uint64_t seed);
MinlpInstance sample_instance(std::uint64_t seed);

// Instance JSON: {"c":[..5..],"family":"floudas_e1","seed":int|null}
nlohmann::json instance_to_json(const MinlpInstance& inst);
MinlpInstance instance_from_json(const nlohmann::json& j);
std::string canonical_instance_string(const MinlpInstance& inst);

}  // namespace hgbd
