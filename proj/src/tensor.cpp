#include "gaca/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace gaca {

namespace {

thread_local Tape* g_active_tape = nullptr;

void require_rank2(const Tensor& x, const char* op) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                         shape_string(x.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

MatrixMap as_matrix(Array& a, Index rows, Index cols) { return {a.data(), rows, cols}; }
ConstMatrixMap as_matrix(const Array& a, Index rows, Index cols) {
  return {a.data(), rows, cols};
}

}  // namespace

Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? "x" : "") << shape[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor

Tensor Tensor::zeros(Shape shape) {
  const Index n = shape_size(shape);
  return constant(std::move(shape), Array::Zero(n));
}

Tensor Tensor::constant(Shape shape, Array values) {
  for (Index e : shape) {
    if (e <= 0) throw DimensionError("tensor extents must be positive: " + shape_string(shape));
  }
  if (shape_size(shape) != values.size()) {
    throw DimensionError("shape " + shape_string(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::constant(const RowMatrix& m) {
  return constant({m.rows(), m.cols()}, Eigen::Map<const Array>(m.data(), m.size()));
}

Tensor Tensor::scalar(double v) { return constant({}, Array::Constant(1, v)); }

Tensor Tensor::parameter(Shape shape, Array values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  t.node_->grad = Array::Zero(t.size());
  return t;
}

Tensor Tensor::parameter(const RowMatrix& m) {
  return parameter({m.rows(), m.cols()}, Eigen::Map<const Array>(m.data(), m.size()));
}

Index Tensor::rows() const {
  const auto& s = node_->shape;
  if (s.empty()) return 1;
  return s.size() == 1 ? 1 : s[0];
}

Index Tensor::cols() const {
  const auto& s = node_->shape;
  if (s.empty()) return 1;
  return s.size() == 1 ? s[0] : s[1];
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

ConstMatrixMap Tensor::matrix() const {
  const Array& v = node_->value;
  return as_matrix(v, rows(), cols());
}

void Tensor::zero_grad() { node_->grad = Array::Zero(size()); }

Tensor Tensor::detach() const { return constant(shape(), value()); }

// ---------------------------------------------------------------------------
// Tape

Tensor Tape::record(Shape shape, Array value, std::vector<Tensor> inputs, Rule rule) {
  Tensor out = Tensor::constant(std::move(shape), std::move(value));
  Tape* tape = g_active_tape;
  if (tape == nullptr) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.requires_grad(); });
  if (!any) return out;
  out.node_->requires_grad = true;
  Entry entry;
  entry.out = out.node_;
  entry.inputs.reserve(inputs.size());
  for (auto& in : inputs) entry.inputs.push_back(in.node_);
  entry.rule = std::move(rule);
  tape->entries_.push_back(std::move(entry));
  return out;
}

Tape::AdjointMap Tape::sweep(const Tensor& loss) const {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  const auto* loss_node = loss.id();
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(entries_.size()) - 1; i >= 0; --i) {
    if (entries_[i].out.get() == loss_node) {
      last = i;
      break;
    }
  }
  if (last < 0) throw ContractError("backward: loss was not produced on this tape");

  AdjointMap adj;
  adj.emplace(loss_node, Array::Ones(1));
  std::vector<Array*> in_adj;
  for (std::ptrdiff_t i = last; i >= 0; --i) {
    const Entry& e = entries_[i];
    auto it = adj.find(e.out.get());
    if (it == adj.end()) continue;
    // Rules may grow the map; hold the output adjoint by value.
    const Array out_adj = it->second;
    in_adj.assign(e.inputs.size(), nullptr);
    for (std::size_t k = 0; k < e.inputs.size(); ++k) {
      const auto& in = e.inputs[k];
      if (!in->requires_grad) continue;
      auto [slot, inserted] = adj.try_emplace(in.get());
      if (inserted) slot->second = Array::Zero(in->value.size());
    }
    for (std::size_t k = 0; k < e.inputs.size(); ++k) {
      if (e.inputs[k]->requires_grad) in_adj[k] = &adj.find(e.inputs[k].get())->second;
    }
    e.rule(out_adj, in_adj);
  }
  return adj;
}

void Tape::backward(const Tensor& loss) {
  AdjointMap adj = sweep(loss);
  std::unordered_set<const detail::TensorNode*> produced;
  produced.reserve(entries_.size());
  for (const auto& e : entries_) produced.insert(e.out.get());
  for (const auto& e : entries_) {
    for (const auto& in : e.inputs) {
      if (!in->requires_grad || produced.count(in.get())) continue;
      auto it = adj.find(in.get());
      if (it == adj.end()) continue;
      if (in->grad.size() != in->value.size()) in->grad = Array::Zero(in->value.size());
      in->grad += it->second;
      adj.erase(it);  // a leaf may appear as input of several entries
    }
  }
}

std::vector<Array> Tape::gradients(const Tensor& loss, std::span<const Tensor> leaves) const {
  AdjointMap adj = sweep(loss);
  std::vector<Array> out;
  out.reserve(leaves.size());
  for (const auto& leaf : leaves) {
    auto it = adj.find(leaf.id());
    out.push_back(it == adj.end() ? Array::Zero(leaf.size()) : it->second);
  }
  return out;
}

void Tape::reset() { entries_.clear(); }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

// ---------------------------------------------------------------------------
// Elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return Tape::record(a.shape(), a.value() + b.value(), {a, b},
                      [](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g;
                        if (in[1]) *in[1] += g;
                      });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return Tape::record(a.shape(), a.value() - b.value(), {a, b},
                      [](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g;
                        if (in[1]) *in[1] -= g;
                      });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return Tape::record(a.shape(), a.value() * b.value(), {a, b},
                      [a, b](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g * b.value();
                        if (in[1]) *in[1] += g * a.value();
                      });
}

Tensor scale(const Tensor& x, double c) {
  return Tape::record(x.shape(), x.value() * c, {x},
                      [c](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g * c;
                      });
}

Tensor add_scalar(const Tensor& x, double c) {
  return Tape::record(x.shape(), x.value() + c, {x},
                      [](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g;
                      });
}

// ---------------------------------------------------------------------------
// Broadcasting

Tensor add_rowwise(const Tensor& m, const Tensor& row) {
  require_rank2(m, "add_rowwise");
  const Index r = m.rows(), c = m.cols();
  if (row.size() != c) {
    throw DimensionError("add_rowwise: " + shape_string(m.shape()) + " vs row " +
                         shape_string(row.shape()));
  }
  Array out = m.value();
  as_matrix(out, r, c).rowwise() += row.value().matrix().transpose();
  return Tape::record(m.shape(), std::move(out), {m, row},
                      [r, c](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g;
                        if (in[1]) {
                          as_matrix(*in[1], 1, c) += as_matrix(g, r, c).colwise().sum();
                        }
                      });
}

Tensor mul_rowwise(const Tensor& m, const Tensor& row) {
  require_rank2(m, "mul_rowwise");
  const Index r = m.rows(), c = m.cols();
  if (row.size() != c) {
    throw DimensionError("mul_rowwise: " + shape_string(m.shape()) + " vs row " +
                         shape_string(row.shape()));
  }
  Array out(m.size());
  as_matrix(out, r, c) =
      m.matrix().array().rowwise() * row.value().transpose();
  return Tape::record(m.shape(), std::move(out), {m, row},
                      [m, row, r, c](const Array& g, std::span<Array* const> in) {
                        auto gm = as_matrix(g, r, c).array();
                        if (in[0]) {
                          as_matrix(*in[0], r, c).array() += gm.rowwise() * row.value().transpose();
                        }
                        if (in[1]) {
                          as_matrix(*in[1], 1, c).array() +=
                              (gm * m.matrix().array()).colwise().sum();
                        }
                      });
}

Tensor mul_colwise(const Tensor& m, const Tensor& col) {
  require_rank2(m, "mul_colwise");
  const Index r = m.rows(), c = m.cols();
  if (col.size() != r) {
    throw DimensionError("mul_colwise: " + shape_string(m.shape()) + " vs column " +
                         shape_string(col.shape()));
  }
  Array out(m.size());
  as_matrix(out, r, c) = m.matrix().array().colwise() * col.value();
  return Tape::record(m.shape(), std::move(out), {m, col},
                      [m, col, r, c](const Array& g, std::span<Array* const> in) {
                        auto gm = as_matrix(g, r, c).array();
                        if (in[0]) as_matrix(*in[0], r, c).array() += gm.colwise() * col.value();
                        if (in[1]) *in[1] += (gm * m.matrix().array()).rowwise().sum();
                      });
}

// ---------------------------------------------------------------------------
// Linear algebra and layout

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const Index m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Array out(m * n);
  as_matrix(out, m, n).noalias() = a.matrix() * b.matrix();
  return Tape::record({m, n}, std::move(out), {a, b},
                      [a, b, m, k, n](const Array& g, std::span<Array* const> in) {
                        auto gm = as_matrix(g, m, n);
                        if (in[0]) as_matrix(*in[0], m, k).noalias() += gm * b.matrix().transpose();
                        if (in[1]) as_matrix(*in[1], k, n).noalias() += a.matrix().transpose() * gm;
                      });
}

Tensor transpose(const Tensor& x) {
  require_rank2(x, "transpose");
  const Index r = x.rows(), c = x.cols();
  Array out(x.size());
  as_matrix(out, c, r) = x.matrix().transpose();
  return Tape::record({c, r}, std::move(out), {x},
                      [r, c](const Array& g, std::span<Array* const> in) {
                        if (in[0]) as_matrix(*in[0], r, c) += as_matrix(g, c, r).transpose();
                      });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) + " as " +
                         shape_string(shape));
  }
  return Tape::record(std::move(shape), x.value(), {x},
                      [](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g;
                      });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const Index c = parts.front().cols();
  Index r = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_rows");
    if (p.cols() != c) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts.front().shape()) +
                           " vs " + shape_string(p.shape()));
    }
    r += p.rows();
  }
  Array out(r * c);
  Index offset = 0;
  std::vector<Index> sizes;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p.value();
    offset += p.size();
    sizes.push_back(p.size());
  }
  return Tape::record({r, c}, std::move(out), parts,
                      [sizes](const Array& g, std::span<Array* const> in) {
                        Index off = 0;
                        for (std::size_t i = 0; i < sizes.size(); ++i) {
                          if (in[i]) *in[i] += g.segment(off, sizes[i]);
                          off += sizes[i];
                        }
                      });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const Index r = parts.front().rows();
  Index c = 0;
  std::vector<Index> widths;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != r) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts.front().shape()) +
                           " vs " + shape_string(p.shape()));
    }
    widths.push_back(p.cols());
    c += p.cols();
  }
  Array out(r * c);
  auto om = as_matrix(out, r, c);
  Index offset = 0;
  for (const auto& p : parts) {
    om.middleCols(offset, p.cols()) = p.matrix();
    offset += p.cols();
  }
  return Tape::record({r, c}, std::move(out), parts,
                      [widths, r, c](const Array& g, std::span<Array* const> in) {
                        auto gm = as_matrix(g, r, c);
                        Index off = 0;
                        for (std::size_t i = 0; i < widths.size(); ++i) {
                          if (in[i]) as_matrix(*in[i], r, widths[i]) += gm.middleCols(off, widths[i]);
                          off += widths[i];
                        }
                      });
}

Tensor slice_rows(const Tensor& x, Index start, Index count) {
  require_rank2(x, "slice_rows");
  if (start < 0 || count <= 0 || start + count > x.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " + shape_string(x.shape()));
  }
  const Index c = x.cols();
  return Tape::record({count, c}, x.value().segment(start * c, count * c), {x},
                      [start, count, c](const Array& g, std::span<Array* const> in) {
                        if (in[0]) in[0]->segment(start * c, count * c) += g;
                      });
}

Tensor slice_cols(const Tensor& x, Index start, Index count) {
  require_rank2(x, "slice_cols");
  if (start < 0 || count <= 0 || start + count > x.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " + shape_string(x.shape()));
  }
  const Index r = x.rows(), c = x.cols();
  Array out(r * count);
  as_matrix(out, r, count) = x.matrix().middleCols(start, count);
  return Tape::record({r, count}, std::move(out), {x},
                      [start, count, r, c](const Array& g, std::span<Array* const> in) {
                        if (in[0]) as_matrix(*in[0], r, c).middleCols(start, count) += as_matrix(g, r, count);
                      });
}

// ---------------------------------------------------------------------------
// Reductions

Tensor sum(const Tensor& x) {
  return Tape::record({}, Array::Constant(1, x.value().sum()), {x},
                      [](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g[0];
                      });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  return Tape::record({}, Array::Constant(1, x.value().sum() / n), {x},
                      [n](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g[0] / n;
                      });
}

// ---------------------------------------------------------------------------
// Nonlinearities

Tensor softmax(const Tensor& x, int axis) {
  Index groups = 1, len = x.size();
  bool by_rows = true;  // each group is a contiguous row
  if (x.rank() == 2) {
    if (axis == -1) axis = 1;
    if (axis == 1) {
      groups = x.rows();
      len = x.cols();
    } else if (axis == 0) {
      groups = x.cols();
      len = x.rows();
      by_rows = false;
    } else {
      throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for rank 2");
    }
  } else if (x.rank() > 2 || (axis != -1 && axis != 0)) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " +
                         shape_string(x.shape()));
  }
  // Work in "groups x len" layout; transpose for column groups.
  RowMatrix v = by_rows ? RowMatrix(x.value().reshaped<Eigen::RowMajor>(groups, len))
                        : RowMatrix(x.matrix().transpose());
  for (Index gi = 0; gi < groups; ++gi) {
    auto row = v.row(gi).array();
    row = (row - row.maxCoeff()).exp();
    row /= row.sum();
  }
  Array out(x.size());
  if (by_rows) {
    as_matrix(out, groups, len) = v;
  } else {
    as_matrix(out, len, groups) = v.transpose();
  }
  return Tape::record(x.shape(), out, {x},
                      [v, groups, len, by_rows](const Array& g, std::span<Array* const> in) {
                        if (!in[0]) return;
                        RowMatrix gm = by_rows ? RowMatrix(as_matrix(g, groups, len))
                                               : RowMatrix(as_matrix(g, len, groups).transpose());
                        RowMatrix dx(groups, len);
                        for (Index gi = 0; gi < groups; ++gi) {
                          const double dot = gm.row(gi).dot(v.row(gi));
                          dx.row(gi) = (v.row(gi).array() * (gm.row(gi).array() - dot)).matrix();
                        }
                        if (by_rows) {
                          as_matrix(*in[0], groups, len) += dx;
                        } else {
                          as_matrix(*in[0], len, groups) += dx.transpose();
                        }
                      });
}

Tensor sigmoid(const Tensor& x) {
  const Array& xv = x.value();
  Array y(xv.size());
  for (Index i = 0; i < xv.size(); ++i) {
    // Branch on sign so exp never overflows.
    y[i] = xv[i] >= 0 ? 1.0 / (1.0 + std::exp(-xv[i])) : std::exp(xv[i]) / (1.0 + std::exp(xv[i]));
  }
  return Tape::record(x.shape(), y, {x},
                      [y](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += g * y * (1.0 - y);
                      });
}

Tensor relu(const Tensor& x) {
  return Tape::record(x.shape(), x.value().max(0.0), {x},
                      [x](const Array& g, std::span<Array* const> in) {
                        if (in[0]) *in[0] += (x.value() > 0.0).select(g, 0.0);
                      });
}

Tensor layer_norm(const Tensor& x, double eps) {
  require_rank2(x, "layer_norm");
  const Index r = x.rows(), c = x.cols();
  RowMatrix xhat(r, c);
  Array inv_std(r);
  auto xm = x.matrix();
  for (Index i = 0; i < r; ++i) {
    const double mu = xm.row(i).mean();
    const double var = (xm.row(i).array() - mu).square().mean();
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (xm.row(i).array() - mu) * inv_std[i];
  }
  Array out = Eigen::Map<const Array>(xhat.data(), xhat.size());
  return Tape::record(x.shape(), std::move(out), {x},
                      [xhat, inv_std, r, c](const Array& g, std::span<Array* const> in) {
                        if (!in[0]) return;
                        auto gm = as_matrix(g, r, c);
                        auto dx = as_matrix(*in[0], r, c);
                        for (Index i = 0; i < r; ++i) {
                          const double gmean = gm.row(i).mean();
                          const double gx = gm.row(i).dot(xhat.row(i)) / static_cast<double>(c);
                          dx.row(i).array() +=
                              inv_std[i] * (gm.row(i).array() - gmean - xhat.row(i).array() * gx);
                        }
                      });
}

// ---------------------------------------------------------------------------
// Convolution

Index reflect_index(Index i, Index n) {
  if (n == 1) return 0;
  const Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace {

void check_kernel(Index length) {
  if (length % 2 == 0) {
    throw ConfigError("conv1d_same: kernel length " + std::to_string(length) + " is even");
  }
}

// out[t] += sum_u k[u] * x[reflect(t + u - h)], strided access over `stride`.
void correlate(const double* x, Index n, Index stride, const Array& k, double* out,
               Index out_stride) {
  const Index h = k.size() / 2;
  for (Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (Index u = 0; u < k.size(); ++u) acc += k[u] * x[reflect_index(t + u - h, n) * stride];
    out[t * out_stride] += acc;
  }
}

// Adjoint of correlate: gx[reflect(t + u - h)] += k[u] * g[t].
void correlate_adjoint(const double* g, Index n, Index g_stride, const Array& k, double* gx,
                       Index stride) {
  const Index h = k.size() / 2;
  for (Index t = 0; t < n; ++t) {
    const double gt = g[t * g_stride];
    if (gt == 0.0) continue;
    for (Index u = 0; u < k.size(); ++u) gx[reflect_index(t + u - h, n) * stride] += k[u] * gt;
  }
}

}  // namespace

Tensor conv1d_same(const Tensor& signal, const Tensor& kernel) {
  if (signal.rank() != 1 || kernel.rank() != 1) {
    throw DimensionError("conv1d_same: expected rank-1 signal and kernel, got " +
                         shape_string(signal.shape()) + " and " + shape_string(kernel.shape()));
  }
  check_kernel(kernel.size());
  const Index n = signal.size();
  Array out = Array::Zero(n);
  Array k = kernel.value();
  correlate(signal.value().data(), n, 1, k, out.data(), 1);
  return Tape::record(signal.shape(), std::move(out), {signal},
                      [k, n](const Array& g, std::span<Array* const> in) {
                        if (in[0]) correlate_adjoint(g.data(), n, 1, k, in[0]->data(), 1);
                      });
}

Tensor conv1d_same_columns(const Tensor& signal, const std::vector<Array>& kernels) {
  require_rank2(signal, "conv1d_same_columns");
  for (const auto& k : kernels) check_kernel(k.size());
  const Index n = signal.rows(), joints = signal.cols();
  const Index s_count = static_cast<Index>(kernels.size());
  const Index width = joints * s_count;
  Array out = Array::Zero(n * width);
  for (Index j = 0; j < joints; ++j) {
    for (Index s = 0; s < s_count; ++s) {
      correlate(signal.value().data() + j, n, joints, kernels[s], out.data() + j * s_count + s,
                width);
    }
  }
  return Tape::record({n, width}, std::move(out), {signal},
                      [kernels, n, joints, s_count, width](const Array& g,
                                                           std::span<Array* const> in) {
                        if (!in[0]) return;
                        for (Index j = 0; j < joints; ++j) {
                          for (Index s = 0; s < s_count; ++s) {
                            correlate_adjoint(g.data() + j * s_count + s, n, width, kernels[s],
                                              in[0]->data() + j, joints);
                          }
                        }
                      });
}

// ---------------------------------------------------------------------------
// Embeddings

RowMatrix sinusoidal_embedding(double x, Index dim) {
  const Index half = dim / 2;
  RowMatrix e = RowMatrix::Zero(1, dim);
  for (Index i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) /
                                 static_cast<double>(std::max<Index>(half, 1)));
    e(0, i) = std::sin(x * freq);
    e(0, half + i) = std::cos(x * freq);
  }
  return e;
}

RowMatrix positional_embedding(Index count, Index dim) {
  RowMatrix e(count, dim);
  for (Index i = 0; i < count; ++i) e.row(i) = sinusoidal_embedding(static_cast<double>(i), dim);
  return e;
}

}  // namespace gaca
