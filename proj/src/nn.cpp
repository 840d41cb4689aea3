#include "gaca/nn.hpp"

#include <cmath>

namespace gaca {

RowMatrix uniform_matrix(Index rows, Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

RowMatrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Linear make_linear(Index in, Index out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  return {Tensor::parameter(uniform_matrix(in, out, bound, rng)),
          Tensor::parameter(RowMatrix::Zero(1, out))};
}

Mlp make_mlp(Index in, Index hidden, Index out, Rng& rng) {
  Linear fc1 = make_linear(in, hidden, rng);
  Linear fc2 = make_linear(hidden, out, rng);
  return {std::move(fc1), std::move(fc2)};
}

LayerNorm make_layer_norm(Index width) {
  return {Tensor::parameter(RowMatrix::Ones(1, width)),
          Tensor::parameter(RowMatrix::Zero(1, width))};
}

void ParamSet::add(std::string name, const Tensor& t) {
  entries_.push_back({std::move(name), t});
}

void ParamSet::add(const std::string& prefix, const Linear& l) {
  add(prefix + ".weight", l.weight);
  add(prefix + ".bias", l.bias);
}

void ParamSet::add(const std::string& prefix, const Mlp& m) {
  add(prefix + ".fc1", m.fc1);
  add(prefix + ".fc2", m.fc2);
}

void ParamSet::add(const std::string& prefix, const LayerNorm& n) {
  add(prefix + ".gain", n.gain);
  add(prefix + ".bias", n.bias);
}

void ParamSet::append(const ParamSet& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::vector<Tensor> ParamSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

Index ParamSet::scalar_count() const {
  Index n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

Adam::Adam(const ParamSet& params, AdamConfig config)
    : params_(params.tensors()), config_(config) {
  for (const auto& p : params_) {
    m_.push_back(Array::Zero(p.size()));
    v_.push_back(Array::Zero(p.size()));
  }
}

void Adam::step(const std::vector<Array>& grads) {
  if (grads.size() != params_.size()) {
    throw DimensionError("Adam::step: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(params_.size()) + " parameters");
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i].square();
    params_[i].mutable_value() -=
        config_.learning_rate * (m_[i] / c1) / ((v_[i] / c2).sqrt() + config_.eps);
  }
}

double global_norm(const std::vector<Array>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.square().sum();
  return std::sqrt(sq);
}

double clip_global_norm(std::vector<Array>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& g : grads) g *= f;
  }
  return norm;
}

}  // namespace gaca
