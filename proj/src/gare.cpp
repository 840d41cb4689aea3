#include "gaca/gare.hpp"

#include <cmath>
#include <numbers>

namespace gaca {

WaveletBank build_wavelet_bank(Index scales, double base_period) {
  if (scales < 1) throw ConfigError("wavelet bank needs at least one scale");
  if (!(base_period >= 2.0)) {
    throw ConfigError("wavelet base period " + format_real(base_period) +
                      " frames is below the 2-frame Nyquist limit");
  }
  WaveletBank bank;
  bank.base_period = base_period;
  for (Index s = 0; s < scales; ++s) {
    const double period = base_period * std::ldexp(1.0, static_cast<int>(s));
    const double sigma = period / 2.0;
    const Index half = static_cast<Index>(std::ceil(3.0 * sigma));
    Array k(2 * half + 1);
    for (Index i = 0; i < k.size(); ++i) {
      const double u = static_cast<double>(i - half);
      k[i] = std::exp(-u * u / (2.0 * sigma * sigma)) * std::cos(2.0 * std::numbers::pi * u / period);
    }
    k -= k.mean();
    k /= k.matrix().norm();
    bank.periods.push_back(period);
    bank.sigmas.push_back(sigma);
    bank.kernels.push_back(std::move(k));
  }
  return bank;
}

void validate(const GareConfig& c) {
  if (c.scales < 1) throw ConfigError("gare: scales must be >= 1");
  if (!(c.base_period >= 2.0)) throw ConfigError("gare: base_period must be >= 2 frames");
  if (c.bins < 2) throw ConfigError("gare: bins must be >= 2");
  if (c.dim < 1 || c.weight_hidden < 1 || c.attn_hidden < 1) {
    throw ConfigError("gare: dim, weight_hidden and attn_hidden must be >= 1");
  }
}

ParamSet GareParams::params() const {
  ParamSet p;
  p.add("gare.weight_net", weight_net);
  p.add("gare.fuse_proj", fuse_proj);
  p.add("gare.attn_net", attn_net);
  return p;
}

GareParams init_gare_params(const GareConfig& config, Rng& rng) {
  validate(config);
  GareParams p;
  p.scales = config.scales;
  p.bins = config.bins;
  p.dim = config.dim;
  p.weight_net = make_mlp(1 + config.scales, config.weight_hidden, 1, rng);
  p.fuse_proj = make_linear(config.bins * config.scales + config.scales, config.dim, rng);
  p.attn_net = make_mlp(config.dim, config.attn_hidden, 1, rng);
  return p;
}

Tensor wavelet_features(const Tensor& magnitude, const WaveletBank& bank) {
  return conv1d_same_columns(magnitude, bank.kernels);
}

Tensor wavelet_features(const MotionField& motion, const WaveletBank& bank) {
  return wavelet_features(Tensor::constant(motion.magnitude), bank);
}

ScaleComponents scale_components(const MotionField& motion, const WaveletBank& bank) {
  if (motion.coords < 2) throw ConfigError("scale_components: phase needs x and y components");
  ScaleComponents c;
  c.joints = motion.joints;
  c.scales = bank.scales();
  const Tensor fx = conv1d_same_columns(Tensor::constant(motion.component(0)), bank.kernels);
  const Tensor fy = conv1d_same_columns(Tensor::constant(motion.component(1)), bank.kernels);
  c.x = fx.matrix();
  c.y = fy.matrix();
  c.magnitude = (c.x.array().square() + c.y.array().square()).sqrt().matrix();
  return c;
}

Tensor joint_weights(const Tensor& magnitude, const Tensor& wavelet, const GareParams& params) {
  const Index steps = magnitude.rows(), joints = magnitude.cols(), scales = params.scales;
  if (wavelet.rows() != steps || wavelet.cols() != joints * scales) {
    throw DimensionError("joint_weights: wavelet " + shape_string(wavelet.shape()) +
                         " does not match magnitude " + shape_string(magnitude.shape()) + " with " +
                         std::to_string(scales) + " scales");
  }
  // One row per (t, j): [speed, W_1..W_S].
  const Tensor features = concat_cols({reshape(magnitude, {steps * joints, 1}),
                                       reshape(wavelet, {steps * joints, scales})});
  const Tensor logits = params.weight_net(features);
  return softmax(reshape(logits, {steps, joints}), 1);
}

Index phase_bin(double y, double x, Index bins) {
  const double width = 2.0 * std::numbers::pi / static_cast<double>(bins);
  const double angle = std::atan2(y, x);
  auto k = static_cast<Index>(std::floor((angle + std::numbers::pi) / width));
  if (k >= bins || k < 0) k = 0;
  return k;
}

Tensor phase_histograms(const ScaleComponents& comps, const Tensor& weights, Index bins) {
  if (bins < 2) throw ConfigError("phase_histograms: need at least 2 bins");
  const Index steps = comps.x.rows(), joints = comps.joints, scales = comps.scales;
  if (weights.rows() != steps || weights.cols() != joints) {
    throw DimensionError("phase_histograms: weights " + shape_string(weights.shape()) +
                         " do not match " + std::to_string(steps) + " steps x " +
                         std::to_string(joints) + " joints");
  }
  const Index width = scales * bins;
  std::vector<Index> bin(static_cast<std::size_t>(steps * joints * scales));
  for (Index t = 0; t < steps; ++t) {
    for (Index c = 0; c < joints * scales; ++c) {
      bin[static_cast<std::size_t>(t * joints * scales + c)] = phase_bin(comps.y(t, c), comps.x(t, c), bins);
    }
  }
  const Tensor mag = Tensor::constant(comps.magnitude);
  Array out = Array::Zero(steps * width);
  const Array& w = weights.value();
  for (Index t = 0; t < steps; ++t) {
    for (Index j = 0; j < joints; ++j) {
      for (Index s = 0; s < scales; ++s) {
        const Index c = j * scales + s;
        out[t * width + s * bins + bin[static_cast<std::size_t>(t * joints * scales + c)]] +=
            w[t * joints + j] * comps.magnitude(t, c);
      }
    }
  }
  return Tape::record(
      {steps, width}, std::move(out), {weights, mag},
      [bin, weights, mag, steps, joints, scales, bins, width](const Array& g,
                                                              std::span<Array* const> in) {
        for (Index t = 0; t < steps; ++t) {
          for (Index j = 0; j < joints; ++j) {
            for (Index s = 0; s < scales; ++s) {
              const Index c = j * scales + s;
              const double gh =
                  g[t * width + s * bins + bin[static_cast<std::size_t>(t * joints * scales + c)]];
              if (in[0]) (*in[0])[t * joints + j] += gh * mag.value()[t * joints * scales + c];
              if (in[1]) (*in[1])[t * joints * scales + c] += gh * weights.value()[t * joints + j];
            }
          }
        }
      });
}

Tensor weighted_wavelet(const Tensor& weights, const Tensor& wavelet, Index scales) {
  const Index steps = weights.rows(), joints = weights.cols();
  if (wavelet.rows() != steps || wavelet.cols() != joints * scales) {
    throw DimensionError("weighted_wavelet: " + shape_string(weights.shape()) + " vs " +
                         shape_string(wavelet.shape()));
  }
  Array out(steps * scales);
  for (Index t = 0; t < steps; ++t) {
    // Row t of W viewed as J x S.
    ConstMatrixMap wt(wavelet.value().data() + t * joints * scales, joints, scales);
    out.segment(t * scales, scales) = (weights.matrix().row(t) * wt).transpose().array();
  }
  return Tape::record({steps, scales}, std::move(out), {weights, wavelet},
                      [weights, wavelet, steps, joints, scales](const Array& g,
                                                                std::span<Array* const> in) {
                        for (Index t = 0; t < steps; ++t) {
                          ConstMatrixMap wt(wavelet.value().data() + t * joints * scales, joints, scales);
                          ConstMatrixMap gt(g.data() + t * scales, 1, scales);
                          if (in[0]) {
                            MatrixMap(in[0]->data() + t * joints, 1, joints) += gt * wt.transpose();
                          }
                          if (in[1]) {
                            MatrixMap(in[1]->data() + t * joints * scales, joints, scales) +=
                                weights.matrix().row(t).transpose() * gt;
                          }
                        }
                      });
}

FusedRhythm fuse_rhythm(const Tensor& histograms, const Tensor& wavelet, const Tensor& weights,
                        const GareParams& params) {
  const Index expected = params.bins * params.scales;
  if (histograms.cols() != expected) {
    throw DimensionError("fuse_rhythm: histograms have " + std::to_string(histograms.cols()) +
                         " columns, expected " + std::to_string(expected));
  }
  const Tensor features =
      concat_cols({histograms, weighted_wavelet(weights, wavelet, params.scales)});
  const Tensor projected = params.fuse_proj(features);
  const Tensor gate = sigmoid(params.attn_net(projected));
  return {mul_colwise(projected, gate), gate};
}

GareInputs prepare_gare_inputs(const PoseSequence& pose, const WaveletBank& bank) {
  GareInputs in;
  in.frames = pose.frames;
  in.fps = pose.fps;
  in.motion = motion_diff(pose);
  in.magnitude = Tensor::constant(in.motion.magnitude);
  in.wavelet = wavelet_features(in.magnitude, bank);
  in.components = scale_components(in.motion, bank);
  return in;
}

RhythmEmbedding extract_rhythm(const GareInputs& inputs, const GareParams& params,
                               RhythmIntermediates* intermediates) {
  if (inputs.components.scales != params.scales) {
    throw DimensionError("extract_rhythm: wavelet bank has " + std::to_string(inputs.components.scales) +
                         " scales, parameters expect " + std::to_string(params.scales));
  }
  const Tensor w = joint_weights(inputs.magnitude, inputs.wavelet, params);
  const Tensor h = phase_histograms(inputs.components, w, params.bins);
  FusedRhythm fused = fuse_rhythm(h, inputs.wavelet, w, params);
  const Index steps = fused.rhythm.rows();
  Tensor rhythm = concat_rows({fused.rhythm, slice_rows(fused.rhythm, steps - 1, 1)});
  if (intermediates != nullptr) {
    *intermediates = {inputs.wavelet, w, h, fused.gate};
  }
  return {std::move(rhythm), inputs.fps};
}

RhythmEmbedding extract_rhythm(const PoseSequence& pose, const WaveletBank& bank,
                               const GareParams& params) {
  return extract_rhythm(prepare_gare_inputs(pose, bank), params);
}

Array wavelet_scale_energy(const Tensor& wavelet, Index joints, Index scales) {
  Array energy = Array::Zero(scales);
  const Array& v = wavelet.value();
  for (Index i = 0; i < v.size(); ++i) energy[i % scales] += v[i] * v[i];
  return energy / static_cast<double>(wavelet.rows() * joints);
}

}  // namespace gaca
