#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaca/errors.hpp"

namespace gaca {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Array = Eigen::ArrayXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Index shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct TensorNode {
  Shape shape;
  Array value;
  Array grad;
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// A Tensor is a cheap handle; copies share storage. Leaves created with
/// `parameter` carry `requires_grad` and a zero-initialized gradient.
/// Results of ops are recorded on the active Tape only when at least one
/// input requires a gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor constant(Shape shape, Array values);
  static Tensor constant(const RowMatrix& m);
  static Tensor scalar(double v);
  static Tensor parameter(Shape shape, Array values);
  static Tensor parameter(const RowMatrix& m);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index rank() const { return static_cast<Index>(node_->shape.size()); }
  Index size() const { return node_->value.size(); }
  Index rows() const;
  Index cols() const;

  const Array& value() const { return node_->value; }
  Array& mutable_value() { return node_->value; }
  double item() const;
  double at(Index r, Index c) const { return node_->value[r * cols() + c]; }
  ConstMatrixMap matrix() const;

  bool requires_grad() const { return node_->requires_grad; }
  const Array& grad() const { return node_->grad; }
  Array& mutable_grad() { return node_->grad; }
  void zero_grad();

  /// Same shape and values, no gradient tracking.
  Tensor detach() const;

  const detail::TensorNode* id() const { return node_.get(); }

 private:
  friend class Tape;
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
};

/// Records executed operations with their local adjoint rules.
///
/// Single-owner: one tape per thread of work. Ops record onto the tape
/// installed by a TapeScope on the calling thread.
class Tape {
 public:
  /// Adds `out_adj` contributions into each `in_adj[i]` (null when input i
  /// does not need a gradient).
  using Rule = std::function<void(const Array& out_adj, std::span<Array* const> in_adj)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Creates the output tensor and records it when any input needs a gradient.
  static Tensor record(Shape shape, Array value, std::vector<Tensor> inputs, Rule rule);

  /// Seeds d(loss)=1, replays adjoints in reverse and accumulates into leaf grads.
  void backward(const Tensor& loss);

  /// Same sweep as backward but returns leaf adjoints instead of touching
  /// shared leaf buffers. Entries are zero for leaves the loss does not reach.
  std::vector<Array> gradients(const Tensor& loss, std::span<const Tensor> leaves) const;

  void reset();
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  struct Entry {
    std::shared_ptr<detail::TensorNode> out;
    std::vector<std::shared_ptr<detail::TensorNode>> inputs;
    Rule rule;
  };

  using AdjointMap = std::unordered_map<const detail::TensorNode*, Array>;
  AdjointMap sweep(const Tensor& loss) const;

  std::vector<Entry> entries_;
};

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& x, double c) { return scale(x, c); }
inline Tensor operator*(double c, const Tensor& x) { return scale(x, c); }

// Row/column broadcasting for rank-2 `m` (rows x cols).
Tensor add_rowwise(const Tensor& m, const Tensor& row);  // row: 1 x cols
Tensor mul_rowwise(const Tensor& m, const Tensor& row);  // row: 1 x cols
Tensor mul_colwise(const Tensor& m, const Tensor& col);  // col: rows x 1

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, Index start, Index count);
Tensor slice_cols(const Tensor& x, Index start, Index count);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Rank 1: over all entries. Rank 2: axis 0 normalizes each column, axis 1 each row.
Tensor softmax(const Tensor& x, int axis = -1);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

/// Per-row standardization (no affine part).
Tensor layer_norm(const Tensor& x, double eps = 1e-5);

/// Cross-correlation with reflect padding; output length equals input length.
/// Kernel length must be odd. Adjoints flow to the signal only.
Tensor conv1d_same(const Tensor& signal, const Tensor& kernel);

/// Reflect index into [0, n) without repeating the edge sample; folds
/// repeatedly when the padding exceeds the signal length.
Index reflect_index(Index i, Index n);

/// Applies conv1d_same to every column of `signal` (N x J) with every kernel,
/// producing N x (J*S) with column j*S + s.
Tensor conv1d_same_columns(const Tensor& signal, const std::vector<Array>& kernels);

/// Sinusoidal embedding of a scalar: [sin(x f_0..f_{h-1}), cos(x f_0..f_{h-1})], h = dim/2.
RowMatrix sinusoidal_embedding(double x, Index dim);
/// Rows are sinusoidal_embedding(i, dim) for i in [0, count).
RowMatrix positional_embedding(Index count, Index dim);

}  // namespace gaca
