#pragma once

// Independent oracles shared by the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gaca/nn.hpp"
#include "gaca/pose.hpp"
#include "gaca/tensor.hpp"

namespace gaca::testing {

struct GradCheck {
  // worst per-tensor ||analytic - numeric|| / max(||analytic||, ||numeric||, floor); the floor keeps
  // tensors whose true gradient is zero (an attention key bias, say) from dividing noise by noise
  double max_rel_error = 0.0;
  double max_abs_numeric = 0.0;
  Index checked = 0;
  std::size_t worst_leaf = 0;
  std::vector<double> leaf_errors;
};

/// Central finite differences of a scalar loss over `leaves`. At most
/// `per_leaf` entries per leaf are probed (evenly strided) to bound cost.
inline GradCheck finite_difference_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> leaves,
                                         double eps = 1e-5, Index per_leaf = 1 << 30) {
  std::vector<Array> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = loss_fn();
    analytic = tape.gradients(loss, leaves);
  }
  GradCheck out;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    Tensor leaf = leaves[l];
    const Index n = leaf.size();
    const Index stride = std::max<Index>(1, n / std::min(n, per_leaf));
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (Index i = 0; i < n; i += stride) {
      const double keep = leaf.value()[i];
      leaf.mutable_value()[i] = keep + eps;
      const double up = loss_fn().item();
      leaf.mutable_value()[i] = keep - eps;
      const double down = loss_fn().item();
      leaf.mutable_value()[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[l][i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
      out.max_abs_numeric = std::max(out.max_abs_numeric, std::abs(numeric));
      ++out.checked;
    }
    const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-6});
    const double err = std::sqrt(diff2) / scale;
    out.leaf_errors.push_back(err);
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_leaf = l;
    }
  }
  return out;
}

/// Direct-sum cross-correlation with reflect padding, written independently
/// of the library: out[t] = sum_u k[u + r] x[reflect(t + u)].
inline std::vector<double> brute_correlate(const std::vector<double>& x, const std::vector<double>& k) {
  const long n = static_cast<long>(x.size());
  const long r = static_cast<long>(k.size()) / 2;
  auto reflect = [n](long i) {
    if (n == 1) return 0L;
    const long period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  };
  std::vector<double> out(x.size(), 0.0);
  for (long t = 0; t < n; ++t) {
    for (long u = -r; u <= r; ++u) out[t] += k[u + r] * x[reflect(t + u)];
  }
  return out;
}

inline RowMatrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  return normal_matrix(rows, cols, scale, rng);
}

/// Random pose with positions in [0, 1].
inline PoseSequence random_pose(Index frames, Index joints, Index coords, Rng& rng, double fps = 30.0) {
  PoseSequence p;
  p.frames = frames;
  p.joints = joints;
  p.coords = coords;
  p.fps = fps;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  p.data.resize(frames * joints * coords);
  for (Index i = 0; i < p.data.size(); ++i) p.data[i] = u(rng);
  return p;
}

}  // namespace gaca::testing
