#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hgbd {

/// Raised when an expression is evaluated outside its domain (log or
/// reciprocal of a nonpositive / zero argument).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised on inconsistent vector / matrix dimensions anywhere in the library.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Immutable, shareable expression tree over scalar constants and references
 * to continuous variables x[i].
 *
 * Expressions are the single description of f, g and h: the interior-point
 * solver differentiates them symbolically (gradient and Hessian), cut
 * construction evaluates them, and the KINN loss lowers the gradient
 * expressions into the reverse-mode tape.
 *
 * Construction helpers fold constants and drop additive / multiplicative
 * identities so symbolic derivatives stay small.
 */
class Expr {
 public:
  enum class Kind : unsigned char {
    Constant,
    Variable,
    Sum,
    Product,
    Affine,
    Exp,
    Log,
    Negate,
    MaxZero,
    Step,        // Heaviside, derivative of MaxZero (0 at the kink)
    Reciprocal,  // 1/u, appears in derivatives of Log
  };

  struct Node;

  Expr();  // constant zero
  Expr(double value);  // NOLINT(google-explicit-constructor): constants read naturally

  static Expr constant(double value);
  static Expr variable(std::size_t index);
  /// c0 + sum_k coeff_k * x[index_k]
  static Expr affine(double c0, std::vector<std::pair<std::size_t, double>> terms);

  Kind kind() const;
  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_zero() const;
  double constant_value() const;
  std::size_t variable_index() const;
  const std::vector<Expr>& children() const;
  double affine_offset() const;
  const std::vector<std::pair<std::size_t, double>>& affine_terms() const;

  /// Throws DomainError for log(u <= 0) and 1/0.
  double eval(std::span<const double> x) const;

  /// Symbolic partial derivative with respect to x[var].
  Expr diff(std::size_t var) const;

  /// Largest variable index referenced plus one (0 for constants).
  std::size_t arity() const;

  std::string to_string() const;

  /// Identity of the shared node; used for memoized lowering.
  const Node* id() const { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr max_zero(const Expr& a);
  friend Expr step(const Expr& a);
  friend Expr reciprocal(const Expr& a);
  friend Expr sum(std::vector<Expr> terms);

 private:
  friend struct ExprFactory;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr max_zero(const Expr& a);
Expr step(const Expr& a);
Expr reciprocal(const Expr& a);
Expr sum(std::vector<Expr> terms);

/// Symbolic gradient over x[0..n).
std::vector<Expr> gradient(const Expr& e, std::size_t n);

}  // namespace hgbd
