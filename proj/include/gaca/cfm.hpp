#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gaca/nn.hpp"
#include "gaca/pose.hpp"
#include "gaca/tensor.hpp"

namespace gaca {

struct VelocityConfig {
  Index blocks = 2;
  Index hidden = 64;
  Index heads = 4;
  Index ffn_mult = 2;
  Index latent_len = 50;   // T_m
  Index latent_dim = 8;    // d
  Index rhythm_dim = 64;   // D
  Index cond_dim = 16;     // D_v
  double time_scale = 1000.0;
};

void validate(const VelocityConfig& config);

struct TransformerBlock {
  LayerNorm attn_norm;
  Linear query, key, value, out;
  LayerNorm ffn_norm;
  Mlp ffn;
};

/// Parameters of v_theta(Z_t, t | rhythm, features).
struct VelocityFieldParams {
  VelocityConfig config;
  Linear latent_in;
  Linear rhythm_in;
  Linear cond_in;
  Mlp time_mlp;
  Tensor null_rhythm;  // 1 x hidden, added to every latent token when rhythm is dropped
  Tensor null_cond;    // 1 x hidden, single token replacing the feature tokens
  std::vector<TransformerBlock> blocks;
  LayerNorm final_norm;
  Linear head;

  ParamSet params() const;
};

VelocityFieldParams init_velocity_params(const VelocityConfig& config, Rng& rng);

/// Undefined tensors select the learned null tokens.
struct Conditioning {
  Tensor rhythm;    // T_m x D
  Tensor features;  // T_v x D_v
};

/// Token sequence: [time] ++ [feature tokens | null] ++ [latent + rhythm (or null) + position].
/// Returns the head output at the T_m latent positions (T_m x d).
Tensor velocity(const VelocityFieldParams& params, const Tensor& z_t, double t,
                const Conditioning& cond);

/// Z_t = (1 - t) Z_0 + t Z_1.
RowMatrix interpolate_path(const RowMatrix& z0, const RowMatrix& z1, double t);

/// mean((predicted - (Z_1 - Z_0))^2).
Tensor flow_matching_loss(const Tensor& predicted, const RowMatrix& z1, const RowMatrix& z0);

/// v_uncond + scale (v_cond - v_uncond).
RowMatrix cfg_velocity(const RowMatrix& v_cond, const RowMatrix& v_uncond, double scale);

struct SampleConfig {
  Index steps = 32;
  double cfg_scale = 4.0;
  std::uint64_t seed = 0;
};

void validate(const SampleConfig& config);

using VelocityFn = std::function<RowMatrix(const RowMatrix& z, double t)>;

/// Euler steps z <- z + v(z, k/steps)/steps from `z0`.
RowMatrix euler_integrate(const VelocityFn& field, RowMatrix z0, Index steps);

/// Draws Z_0 ~ N(0, I) from config.seed and integrates the guided field. An
/// empty `conditional` integrates `unconditional` alone.
MusicLatent euler_sample(const VelocityFn& conditional, const VelocityFn& unconditional,
                         Index latent_len, Index latent_dim, const SampleConfig& config);

}  // namespace gaca
