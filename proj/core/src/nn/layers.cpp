#include "hgbd/nn/layers.hpp"

#include <cmath>

namespace hgbd::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity:
      return "identity";
    case Activation::ReLU:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Softplus:
      return "softplus";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "softplus") return Activation::Softplus;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

Var activate(Var v, Activation a) {
  switch (a) {
    case Activation::Identity:
      return v;
    case Activation::ReLU:
      return relu(v);
    case Activation::Sigmoid:
      return sigmoid(v);
    case Activation::Softplus:
      return softplus(v);
  }
  return v;
}

Tensor activate(const Tensor& v, Activation a) {
  Tensor y = v;
  switch (a) {
    case Activation::Identity:
      break;
    case Activation::ReLU:
      for (auto& x : y.values()) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::Sigmoid:
      for (auto& x : y.values()) x = sigmoid_value(x);
      break;
    case Activation::Softplus:
      for (auto& x : y.values()) x = softplus_value(x);
      break;
  }
  return y;
}

Dense::Dense(std::string name, std::size_t in, std::size_t out, Activation act, std::mt19937_64& rng)
    : w_(name + ".W", glorot_uniform(in, out, rng)), b_(name + ".b", Tensor(1, out)), act_(act) {}

Var Dense::forward(Tape& t, Var x) {
  if (x.cols() != in()) {
    throw ShapeError("dense " + w_.name + ": input width " + std::to_string(x.cols()) + ", expected " +
                     std::to_string(in()));
  }
  return activate(add_bias(matmul(x, t.param(w_)), t.param(b_)), act_);
}

Tensor Dense::infer(const Tensor& x) const {
  if (x.cols() != in()) throw ShapeError("dense " + w_.name + ": input width mismatch");
  Tensor y = matmul(x, w_.value);
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += b_.value[c];
  return activate(y, act_);
}

void Dense::zero_output() {
  w_.value.fill(0.0);
  b_.value.fill(0.0);
}

EccLayer::EccLayer(std::string name, std::size_t in, std::size_t out, std::size_t edge_dim,
                   std::size_t filter_hidden, Activation act, std::mt19937_64& rng)
    : in_(in),
      out_(out),
      filter_f_(name + ".F", glorot_uniform(edge_dim, filter_hidden, rng)),
      filter_c_(name + ".c", Tensor(1, filter_hidden)),
      w_(name + ".W", glorot_uniform((filter_hidden + 1) * in, out, rng)),
      b_(name + ".b", Tensor(1, out)),
      act_(act) {}

Var EccLayer::forward(Tape& t, Var h, const Tensor& edge_features, const EdgeList& edges) {
  if (h.cols() != in_) {
    throw ShapeError("ecc " + w_.name + ": node state width " + std::to_string(h.cols()) + ", expected " +
                     std::to_string(in_));
  }
  if (edge_features.rows() != edges.size() || edge_features.cols() != filter_f_.value.rows()) {
    throw ShapeError("ecc " + w_.name + ": edge features " + edge_features.shape_string());
  }
  const std::size_t n = edges.num_nodes;
  Var agg;
  if (edges.size() == 0) {
    agg = t.constant(Tensor(n, filter_channels() * in_));
  } else {
    Var e = t.constant(edge_features);
    Var hidden = relu(add_bias(matmul(e, t.param(filter_f_)), t.param(filter_c_)));
    Var phi = concat_cols({t.constant(Tensor(edges.size(), 1, 1.0)), hidden});
    agg = edge_aggregate(phi, h, edges);
  }
  return activate(add_bias(matmul(agg, t.param(w_)), t.param(b_)), act_);
}

Tensor EccLayer::filter_matrix(std::span<const double> edge_feature) const {
  const std::size_t k = filter_f_.value.cols();
  std::vector<double> phi(k + 1, 0.0);
  phi[0] = 1.0;
  for (std::size_t a = 0; a < k; ++a) {
    double z = filter_c_.value[a];
    for (std::size_t r = 0; r < edge_feature.size(); ++r) z += edge_feature[r] * filter_f_.value(r, a);
    phi[a + 1] = z > 0.0 ? z : 0.0;
  }
  Tensor theta(out_, in_);
  for (std::size_t a = 0; a <= k; ++a)
    for (std::size_t c = 0; c < in_; ++c)
      for (std::size_t o = 0; o < out_; ++o) theta(o, c) += phi[a] * w_.value(a * in_ + c, o);
  return theta;
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

std::size_t parameter_count(const std::vector<Parameter*>& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.size();
  return n;
}

}  // namespace hgbd::nn
