#pragma once

#include <optional>
#include <vector>

#include "gaca/nn.hpp"
#include "gaca/pose.hpp"
#include "gaca/tensor.hpp"

namespace gaca {

/// Real cosine-phase Gabor kernels on a dyadic period ladder.
struct WaveletBank {
  double base_period = 4.0;
  std::vector<double> periods;
  std::vector<double> sigmas;
  std::vector<Array> kernels;

  Index scales() const { return static_cast<Index>(kernels.size()); }
};

/// Kernel s: exp(-u^2 / 2 sigma^2) cos(2 pi u / period), period = base * 2^s,
/// sigma = period / 2, support +-ceil(3 sigma), mean removed then unit L2 norm.
WaveletBank build_wavelet_bank(Index scales, double base_period);

struct GareConfig {
  Index scales = 4;
  double base_period = 4.0;
  Index bins = 8;
  Index dim = 64;
  Index weight_hidden = 16;
  Index attn_hidden = 16;
};

void validate(const GareConfig& config);

struct GareParams {
  Mlp weight_net;   // (1 + S) -> H_w -> 1, applied per joint
  Linear fuse_proj;  // (K*S + S) -> D
  Mlp attn_net;      // D -> hidden -> 1, gate logit
  Index scales = 0;
  Index bins = 0;
  Index dim = 0;

  ParamSet params() const;
};

GareParams init_gare_params(const GareConfig& config, Rng& rng);

/// Per-scale filtered displacement components, each steps x (J*S), column j*S + s.
struct ScaleComponents {
  RowMatrix x;
  RowMatrix y;
  RowMatrix magnitude;
  Index joints = 0;
  Index scales = 0;
};

/// Signed wavelet response of every joint's speed signal: steps x (J*S).
Tensor wavelet_features(const Tensor& magnitude, const WaveletBank& bank);
Tensor wavelet_features(const MotionField& motion, const WaveletBank& bank);

ScaleComponents scale_components(const MotionField& motion, const WaveletBank& bank);

/// Softmax over joints of weight_net([speed, W_1..W_S]) per frame: steps x J.
Tensor joint_weights(const Tensor& magnitude, const Tensor& wavelet, const GareParams& params);

/// Right-open uniform bin of angle atan2(y, x) over [-pi, pi); pi wraps to bin 0.
Index phase_bin(double y, double x, Index bins);

/// steps x (S*K), column s*K + k. Bin membership is constant under differentiation.
Tensor phase_histograms(const ScaleComponents& comps, const Tensor& weights, Index bins);

/// sum_j w[t,j] W[t,j,:]: steps x S.
Tensor weighted_wavelet(const Tensor& weights, const Tensor& wavelet, Index scales);

struct FusedRhythm {
  Tensor rhythm;  // steps x D
  Tensor gate;    // steps x 1, in (0, 1)
};

FusedRhythm fuse_rhythm(const Tensor& histograms, const Tensor& wavelet, const Tensor& weights,
                        const GareParams& params);

struct RhythmIntermediates {
  Tensor wavelet;
  Tensor weights;
  Tensor histograms;
  Tensor gate;
};

struct RhythmEmbedding {
  Tensor data;  // T x D
  double fps = 30.0;

  Index length() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

/// Parameter-independent part of extraction, computed once per clip.
struct GareInputs {
  Index frames = 0;
  double fps = 30.0;
  MotionField motion;
  Tensor magnitude;  // steps x J
  Tensor wavelet;    // steps x (J*S)
  ScaleComponents components;
};

GareInputs prepare_gare_inputs(const PoseSequence& pose, const WaveletBank& bank);

RhythmEmbedding extract_rhythm(const GareInputs& inputs, const GareParams& params,
                               RhythmIntermediates* intermediates = nullptr);
RhythmEmbedding extract_rhythm(const PoseSequence& pose, const WaveletBank& bank,
                               const GareParams& params);

/// Mean over steps and joints of W^2, one entry per scale.
Array wavelet_scale_energy(const Tensor& wavelet, Index joints, Index scales);

}  // namespace gaca
