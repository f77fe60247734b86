#pragma once

#include <random>
#include <string>
#include <vector>

#include "hgbd/nn/tape.hpp"

namespace hgbd::nn {

enum class Activation { Identity, ReLU, Sigmoid, Softplus };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

Var activate(Var v, Activation a);
Tensor activate(const Tensor& v, Activation a);

/// y = act(x W + b) with W: in x out, b: 1 x out; rows of x are samples.
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng);

  Var forward(Tape& t, Var x);
  /// Tape-free evaluation, same arithmetic as forward().
  Tensor infer(const Tensor& x) const;

  std::size_t in() const { return w_.value.rows(); }
  std::size_t out() const { return w_.value.cols(); }
  Activation activation() const { return act_; }
  Parameter& weight() { return w_; }
  Parameter& bias() { return b_; }
  std::vector<Parameter*> params() { return {&w_, &b_}; }
  void zero_output();  // zero weight and bias, used for the "zero-initialized head" checks

 private:
  Parameter w_;
  Parameter b_;
  Activation act_ = Activation::Identity;
};

/**
 * Edge-conditioned convolution.
 *
 *   h_i' = act( (1/max(1,|N(i)|)) * sum_{j in N(i)} Theta(e_ij) h_j + b )
 *
 * Theta is a two-layer filter network.  Its hidden layer is
 * phi(e) = [1, relu(e F + c)] with K+1 channels, and its linear output
 * layer produces the out x in matrix Theta(e) = sum_k phi_k(e) W_k^T.
 * Stacking the W_k gives W of shape ((K+1) in) x out, so the layer is
 * computed as one edge aggregation followed by one matmul.
 */
class EccLayer {
 public:
  EccLayer() = default;
  EccLayer(std::string name, std::size_t in, std::size_t out, std::size_t edge_dim,
           std::size_t filter_hidden, Activation act, std::mt19937_64& rng);

  /// h: N x in node states, edge_features: E x edge_dim.
  Var forward(Tape& t, Var h, const Tensor& edge_features, const EdgeList& edges);

  /// Materializes Theta(e) as an out x in matrix.
  Tensor filter_matrix(std::span<const double> edge_feature) const;

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  std::size_t filter_channels() const { return filter_f_.value.cols() + 1; }
  Parameter& filter_weight() { return filter_f_; }
  Parameter& filter_bias() { return filter_c_; }
  Parameter& weight() { return w_; }
  Parameter& bias() { return b_; }
  std::vector<Parameter*> params() { return {&filter_f_, &filter_c_, &w_, &b_}; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Parameter filter_f_;  // edge_dim x K
  Parameter filter_c_;  // 1 x K
  Parameter w_;         // ((K+1) in) x out
  Parameter b_;         // 1 x out
  Activation act_ = Activation::ReLU;
};

/// Sets every parameter gradient to zero.
void zero_grads(const std::vector<Parameter*>& params);

/// Total number of scalar parameters.
std::size_t parameter_count(const std::vector<Parameter*>& params);

}  // namespace hgbd::nn
