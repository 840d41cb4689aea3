#include "gaca/cfm.hpp"

#include <cmath>
#include <string>

namespace gaca {

void validate(const VelocityConfig& c) {
  if (c.blocks < 1 || c.hidden < 2 || c.heads < 1 || c.ffn_mult < 1) {
    throw ConfigError("velocity field: blocks, heads, ffn_mult >= 1 and hidden >= 2 required");
  }
  if (c.hidden % c.heads != 0) {
    throw ConfigError("velocity field: hidden " + std::to_string(c.hidden) +
                      " not divisible by heads " + std::to_string(c.heads));
  }
  if (c.latent_len < 1 || c.latent_dim < 1 || c.rhythm_dim < 1 || c.cond_dim < 1) {
    throw ConfigError("velocity field: latent_len, latent_dim, rhythm_dim, cond_dim must be >= 1");
  }
}

ParamSet VelocityFieldParams::params() const {
  ParamSet p;
  p.add("field.latent_in", latent_in);
  p.add("field.rhythm_in", rhythm_in);
  p.add("field.cond_in", cond_in);
  p.add("field.time_mlp", time_mlp);
  p.add("field.null_rhythm", null_rhythm);
  p.add("field.null_cond", null_cond);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::string pre = "field.block" + std::to_string(b);
    const auto& blk = blocks[b];
    p.add(pre + ".attn_norm", blk.attn_norm);
    p.add(pre + ".query", blk.query);
    p.add(pre + ".key", blk.key);
    p.add(pre + ".value", blk.value);
    p.add(pre + ".out", blk.out);
    p.add(pre + ".ffn_norm", blk.ffn_norm);
    p.add(pre + ".ffn", blk.ffn);
  }
  p.add("field.final_norm", final_norm);
  p.add("field.head", head);
  return p;
}

VelocityFieldParams init_velocity_params(const VelocityConfig& config, Rng& rng) {
  validate(config);
  const Index h = config.hidden;
  VelocityFieldParams p;
  p.config = config;
  p.latent_in = make_linear(config.latent_dim, h, rng);
  p.rhythm_in = make_linear(config.rhythm_dim, h, rng);
  p.cond_in = make_linear(config.cond_dim, h, rng);
  p.time_mlp = make_mlp(h, h, h, rng);
  p.null_rhythm = Tensor::parameter(normal_matrix(1, h, 0.02, rng));
  p.null_cond = Tensor::parameter(normal_matrix(1, h, 0.02, rng));
  for (Index b = 0; b < config.blocks; ++b) {
    TransformerBlock blk;
    blk.attn_norm = make_layer_norm(h);
    blk.query = make_linear(h, h, rng);
    blk.key = make_linear(h, h, rng);
    blk.value = make_linear(h, h, rng);
    blk.out = make_linear(h, h, rng);
    blk.ffn_norm = make_layer_norm(h);
    blk.ffn = make_mlp(h, config.ffn_mult * h, h, rng);
    p.blocks.push_back(std::move(blk));
  }
  p.final_norm = make_layer_norm(h);
  p.head = make_linear(h, config.latent_dim, rng);
  return p;
}

namespace {

Tensor self_attention(const TransformerBlock& blk, const Tensor& x, Index heads) {
  const Index width = x.cols(), head_dim = width / heads;
  const Tensor q = blk.query(x), k = blk.key(x), v = blk.value(x);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (Index hd = 0; hd < heads; ++hd) {
    const Tensor qh = slice_cols(q, hd * head_dim, head_dim);
    const Tensor kh = slice_cols(k, hd * head_dim, head_dim);
    const Tensor vh = slice_cols(v, hd * head_dim, head_dim);
    const Tensor attn = softmax(scale(matmul(qh, transpose(kh)), inv_sqrt), 1);
    outs.push_back(matmul(attn, vh));
  }
  return blk.out(heads == 1 ? outs.front() : concat_cols(outs));
}

}  // namespace

Tensor velocity(const VelocityFieldParams& params, const Tensor& z_t, double t,
                const Conditioning& cond) {
  const auto& cfg = params.config;
  const Index n = cfg.latent_len, h = cfg.hidden;
  if (z_t.rows() != n || z_t.cols() != cfg.latent_dim) {
    throw ConfigError("velocity: latent " + shape_string(z_t.shape()) + " does not match T_m=" +
                      std::to_string(n) + ", d=" + std::to_string(cfg.latent_dim));
  }
  if (cond.rhythm.defined() && (cond.rhythm.rows() != n || cond.rhythm.cols() != cfg.rhythm_dim)) {
    throw ConfigError("velocity: rhythm " + shape_string(cond.rhythm.shape()) +
                      " does not match latent length " + std::to_string(n) + " and D=" +
                      std::to_string(cfg.rhythm_dim));
  }
  if (cond.features.defined() && cond.features.cols() != cfg.cond_dim) {
    throw ConfigError("velocity: conditioning features " + shape_string(cond.features.shape()) +
                      " do not have D_v=" + std::to_string(cfg.cond_dim));
  }

  const Tensor time_token =
      params.time_mlp(Tensor::constant(sinusoidal_embedding(t * cfg.time_scale, h)));

  Tensor cond_tokens;
  if (cond.features.defined()) {
    cond_tokens = add(params.cond_in(cond.features),
                      Tensor::constant(positional_embedding(cond.features.rows(), h)));
  } else {
    cond_tokens = params.null_cond;
  }

  Tensor latent_tokens = add(params.latent_in(z_t), Tensor::constant(positional_embedding(n, h)));
  if (cond.rhythm.defined()) {
    latent_tokens = add(latent_tokens, params.rhythm_in(cond.rhythm));
  } else {
    latent_tokens = add_rowwise(latent_tokens, params.null_rhythm);
  }

  const Index offset = 1 + cond_tokens.rows();
  Tensor x = concat_rows({time_token, cond_tokens, latent_tokens});
  for (const auto& blk : params.blocks) {
    x = add(x, self_attention(blk, blk.attn_norm(x), cfg.heads));
    x = add(x, blk.ffn(blk.ffn_norm(x)));
  }
  return params.head(params.final_norm(slice_rows(x, offset, n)));
}

RowMatrix interpolate_path(const RowMatrix& z0, const RowMatrix& z1, double t) {
  if (z0.rows() != z1.rows() || z0.cols() != z1.cols()) {
    throw ConfigError("interpolate_path: Z_0 and Z_1 shapes differ");
  }
  return (1.0 - t) * z0 + t * z1;
}

Tensor flow_matching_loss(const Tensor& predicted, const RowMatrix& z1, const RowMatrix& z0) {
  if (z0.rows() != z1.rows() || z0.cols() != z1.cols() || predicted.rows() != z1.rows() ||
      predicted.cols() != z1.cols()) {
    throw ConfigError("flow_matching_loss: shapes differ (prediction " +
                      shape_string(predicted.shape()) + ", latent " + std::to_string(z1.rows()) +
                      "x" + std::to_string(z1.cols()) + ")");
  }
  const Tensor target = Tensor::constant(RowMatrix(z1 - z0));
  const Tensor diff = sub(predicted, target);
  return mean(mul(diff, diff));
}

RowMatrix cfg_velocity(const RowMatrix& v_cond, const RowMatrix& v_uncond, double scale) {
  if (v_cond.rows() != v_uncond.rows() || v_cond.cols() != v_uncond.cols()) {
    throw DimensionError("cfg_velocity: conditional and unconditional shapes differ");
  }
  return v_uncond + scale * (v_cond - v_uncond);
}

void validate(const SampleConfig& c) {
  if (c.steps < 1) throw ConfigError("sampler: steps must be >= 1");
  if (!(c.cfg_scale >= 0.0)) throw ConfigError("sampler: cfg_scale must be >= 0");
}

RowMatrix euler_integrate(const VelocityFn& field, RowMatrix z, Index steps) {
  if (steps < 1) throw ConfigError("euler_integrate: steps must be >= 1");
  const double dt = 1.0 / static_cast<double>(steps);
  for (Index k = 0; k < steps; ++k) {
    z += dt * field(z, static_cast<double>(k) * dt);
  }
  return z;
}

MusicLatent euler_sample(const VelocityFn& conditional, const VelocityFn& unconditional,
                         Index latent_len, Index latent_dim, const SampleConfig& config) {
  validate(config);
  Rng rng(config.seed);
  RowMatrix z0 = normal_matrix(latent_len, latent_dim, 1.0, rng);
  if (!conditional) return {euler_integrate(unconditional, std::move(z0), config.steps)};
  const VelocityFn guided = [&](const RowMatrix& z, double t) {
    return cfg_velocity(conditional(z, t), unconditional(z, t), config.cfg_scale);
  };
  return {euler_integrate(guided, std::move(z0), config.steps)};
}

}  // namespace gaca
