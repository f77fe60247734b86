#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hgbd/nn/tensor.hpp"

namespace hgbd::nn {

/// Trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Directed edges j -> i; messages flow from src to dst.
struct EdgeList {
  std::size_t num_nodes = 0;
  std::vector<std::uint32_t> src;
  std::vector<std::uint32_t> dst;
  std::size_t size() const { return src.size(); }
};

/**
 * Reverse-mode tape with eager forward evaluation.
 *
 * Every op evaluates immediately and records a closure that pushes the
 * output adjoint to its inputs.  backward() walks nodes in reverse
 * creation order (a valid topological order) and accumulates adjoints of
 * parameter leaves into Parameter::grad.  Summations run left to right.
 */
class Tape {
 public:
  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var constant(double value) { return constant(Tensor::scalar(value)); }
  Var param(Parameter& p);

  /// Requires a 1x1 loss.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Adjoint of any node after backward(); zeros if unreached.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Internal API used by the op implementations.
  using Backward = std::function<void(Tape&, std::uint32_t self)>;
  Var push(Tensor value, bool requires_grad, Backward backward);
  Tensor& grad_ref(std::uint32_t id);
  const Tensor& value_ref(std::uint32_t id) const { return nodes_[id].value; }
  bool needs(std::uint32_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    Parameter* param = nullptr;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

/// Stable scalar versions shared with tape-free inference paths.
double sigmoid_value(double x);
double softplus_value(double x);

// --- ops -------------------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);            // elementwise, equal shapes
Var add_bias(Var a, Var bias);    // a: r x c, bias: 1 x c
Var mul_col(Var a, Var col);      // a: r x c, col: r x 1 broadcast across columns
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);
Var relu(Var a);                  // subgradient 0 at the kink
Var sigmoid(Var a);
Var softplus(Var a);              // ln(1 + e^a), stable
Var exp(Var a);
Var log(Var a);                   // throws DomainViolation on a <= 0
Var sqrt(Var a);
Var square(Var a);
Var reciprocal(Var a);
Var heaviside(Var a);             // piecewise constant, zero adjoint
Var minimum(Var a, Var b);        // elementwise; ties route the adjoint to a
Var clamp(Var a, double lo, double hi);
Var sum(Var a);                   // -> 1 x 1
Var mean(Var a);                  // -> 1 x 1
Var sum_rows(Var a);              // r x c -> 1 x c (global sum-pool)
Var column(Var a, std::size_t j); // r x c -> r x 1
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var concat_cols(const std::vector<Var>& parts);
Var squared_norm(Var a);          // sum of squares -> 1 x 1

/// ECC aggregation.  phi: E x K edge coefficients, h: N x d node states.
/// Output row i, block k: (1/max(1,deg_in(i))) * sum_{e: j->i} phi[e,k] * h[j,:].
Var edge_aggregate(Var phi, Var h, const EdgeList& edges);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

/// Gradients of every parameter after backward(), keyed by name.
std::map<std::string, Tensor> gradient_map(const std::vector<Parameter*>& params);

}  // namespace hgbd::nn
