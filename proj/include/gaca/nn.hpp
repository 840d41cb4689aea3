#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gaca/tensor.hpp"

namespace gaca {

using Rng = std::mt19937_64;

/// Uniform(-bound, bound) matrix drawn in row-major order.
RowMatrix uniform_matrix(Index rows, Index cols, double bound, Rng& rng);
RowMatrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng);

/// y = x W + b, W: in x out, b: 1 x out.
struct Linear {
  Tensor weight;
  Tensor bias;

  Tensor operator()(const Tensor& x) const { return add_rowwise(matmul(x, weight), bias); }
  Index in_features() const { return weight.rows(); }
  Index out_features() const { return weight.cols(); }
};

/// Weights uniform(-1/sqrt(in), 1/sqrt(in)), zero bias.
Linear make_linear(Index in, Index out, Rng& rng);

/// Two-layer perceptron with a ReLU between the layers.
struct Mlp {
  Linear fc1;
  Linear fc2;

  Tensor operator()(const Tensor& x) const { return fc2(relu(fc1(x))); }
};

Mlp make_mlp(Index in, Index hidden, Index out, Rng& rng);

/// Per-row layer normalization with learned gain and bias.
struct LayerNorm {
  Tensor gain;
  Tensor bias;

  Tensor operator()(const Tensor& x) const {
    return add_rowwise(mul_rowwise(layer_norm(x), gain), bias);
  }
};

LayerNorm make_layer_norm(Index width);

/// Ordered, named view over parameter tensors. Order defines checkpoint
/// layout and gradient summation order.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  void add(std::string name, const Tensor& t);
  void add(const std::string& prefix, const Linear& l);
  void add(const std::string& prefix, const Mlp& m);
  void add(const std::string& prefix, const LayerNorm& n);
  void append(const ParamSet& other);

  const std::vector<Entry>& entries() const& { return entries_; }
  // by value on temporaries so `for (auto& e : model.params().entries())` stays valid
  std::vector<Entry> entries() && { return std::move(entries_); }
  std::vector<Tensor> tensors() const;
  std::size_t size() const { return entries_.size(); }
  Index scalar_count() const;
  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const ParamSet& params, AdamConfig config);

  /// Applies one update using `grads` (same order as the ParamSet).
  void step(const std::vector<Array>& grads);
  std::int64_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<Array> m_;
  std::vector<Array> v_;
  std::int64_t t_ = 0;
};

double global_norm(const std::vector<Array>& grads);
/// Rescales in place so the global L2 norm is at most `max_norm`; returns the pre-clip norm.
double clip_global_norm(std::vector<Array>& grads, double max_norm);

}  // namespace gaca
