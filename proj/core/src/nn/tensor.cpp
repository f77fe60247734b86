#include "hgbd/nn/tensor.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace hgbd::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Tensor& t) {
  return ConstMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ShapeError("tensor buffer length differs from shape product");
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& o) {
  if (!same_shape(o)) throw ShapeError("+= shape mismatch " + shape_string() + " vs " + o.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& out, bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t k2 = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (k != k2) throw ShapeError("matmul inner dimensions differ: " + a.shape_string() + " x " + b.shape_string());
  if (!accumulate || out.rows() != m || out.cols() != n) {
    if (accumulate && out.size() != 0) throw ShapeError("gemm accumulate into wrong shape");
    out = Tensor(m, n);
  }
  MutMap o(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const ConstMap av = view(a);
  const ConstMap bv = view(b);
  if (!trans_a && !trans_b) {
    o.noalias() += av * bv;
  } else if (trans_a && !trans_b) {
    o.noalias() += av.transpose() * bv;
  } else if (!trans_a && trans_b) {
    o.noalias() += av * bv.transpose();
  } else {
    o.noalias() += av.transpose() * bv.transpose();
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor out;
  gemm(a, false, b, false, out);
  return out;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace hgbd::nn
