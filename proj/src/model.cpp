#include "gaca/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaca/parallel.hpp"

namespace gaca {

std::string to_string(RhythmSource s) {
  switch (s) {
    case RhythmSource::none: return "none";
    case RhythmSource::gare: return "gare";
    case RhythmSource::global_motion: return "global";
    case RhythmSource::binary_diff: return "binary";
  }
  return "?";
}

std::string to_string(Alignment a) { return a == Alignment::cata ? "cata" : "mean"; }

RhythmSource parse_rhythm_source(const std::string& s) {
  if (s == "none") return RhythmSource::none;
  if (s == "gare") return RhythmSource::gare;
  if (s == "global") return RhythmSource::global_motion;
  if (s == "binary") return RhythmSource::binary_diff;
  throw ConfigError("unknown rhythm source '" + s + "' (expected none|gare|global|binary)");
}

Alignment parse_alignment(const std::string& s) {
  if (s == "cata") return Alignment::cata;
  if (s == "mean") return Alignment::mean_pool;
  throw ConfigError("unknown alignment '" + s + "' (expected cata|mean)");
}

void validate(const ModelConfig& c) {
  validate(c.gare);
  validate(c.field);
  if (c.field.rhythm_dim != c.gare.dim) {
    throw ConfigError("rhythm dim D differs between extractor (" + std::to_string(c.gare.dim) +
                      ") and velocity field (" + std::to_string(c.field.rhythm_dim) + ")");
  }
  if (c.joints < 1) throw ConfigError("joints must be >= 1");
}

ParamSet GacaModel::params() const {
  ParamSet p;
  if (config.rhythm == RhythmSource::gare) p.append(gare.params());
  if (config.rhythm != RhythmSource::none && config.alignment == Alignment::cata) {
    p.add("cata.queries", queries.data);
  }
  if (config.rhythm == RhythmSource::global_motion || config.rhythm == RhythmSource::binary_diff) {
    p.add("baseline.proj", baseline_proj);
  }
  p.append(field.params());
  return p;
}

ParamSet GacaModel::all_params() const {
  ParamSet p = gare.params();
  p.add("cata.queries", queries.data);
  p.add("baseline.proj", baseline_proj);
  p.append(field.params());
  return p;
}

GacaModel init_model(const ModelConfig& config, std::uint64_t seed) {
  validate(config);
  GacaModel m;
  m.config = config;
  m.bank = build_wavelet_bank(config.gare.scales, config.gare.base_period);
  Rng rng(seed);
  m.gare = init_gare_params(config.gare, rng);
  m.queries = init_context_queries(config.field.latent_len, config.gare.dim, rng);
  m.baseline_proj = make_linear(config.joints, config.gare.dim, rng);
  m.field = init_velocity_params(config.field, rng);
  return m;
}

ClipData prepare_clip(std::string id, const PoseSequence& pose, const ConditioningFeatures& features,
                      const MusicLatent& latent, const WaveletBank& bank) {
  ClipData c;
  c.id = std::move(id);
  c.gare_inputs = prepare_gare_inputs(pose, bank);
  c.features = features;
  c.latent = latent;

  const RowMatrix& speed = c.gare_inputs.motion.magnitude;  // (T-1) x J
  const Index frames = pose.frames, joints = pose.joints;
  const Eigen::RowVectorXd mean_speed = speed.colwise().mean();
  c.global_feature = mean_speed.replicate(frames, 1);
  c.binary_feature.resize(frames, joints);
  for (Index t = 0; t < frames; ++t) {
    const Index src = std::min(t, speed.rows() - 1);
    for (Index j = 0; j < joints; ++j) {
      c.binary_feature(t, j) = speed(src, j) > mean_speed[j] ? 1.0 : 0.0;
    }
  }
  return c;
}

RhythmEmbedding rhythm_embedding(const GacaModel& model, const ClipData& clip) {
  switch (model.config.rhythm) {
    case RhythmSource::none:
      return {};
    case RhythmSource::gare:
      return extract_rhythm(clip.gare_inputs, model.gare);
    case RhythmSource::global_motion:
      return {model.baseline_proj(Tensor::constant(clip.global_feature)), clip.gare_inputs.fps};
    case RhythmSource::binary_diff:
      return {model.baseline_proj(Tensor::constant(clip.binary_feature)), clip.gare_inputs.fps};
  }
  return {};
}

Tensor aligned_rhythm(const GacaModel& model, const ClipData& clip) {
  if (model.config.rhythm == RhythmSource::none) return {};
  const RhythmEmbedding r = rhythm_embedding(model, clip);
  if (model.config.alignment == Alignment::cata) return align(r, model.queries).data;
  return mean_pool_align(r, model.config.field.latent_len).data;
}

Conditioning make_conditioning(const GacaModel& model, const ClipData& clip, bool drop) {
  Conditioning c;
  if (drop) return c;
  c.rhythm = aligned_rhythm(model, clip);
  if (model.config.use_features) c.features = Tensor::constant(clip.features.data);
  return c;
}

Tensor cfm_loss(const GacaModel& model, const ClipData& clip, double t, const RowMatrix& z0,
                bool drop_conditions) {
  if (t < 0.0 || t > 1.0) throw ConfigError("cfm_loss: t must lie in [0, 1]");
  const RowMatrix& z1 = clip.latent.data;
  if (z0.rows() != z1.rows() || z0.cols() != z1.cols()) {
    throw ConfigError("cfm_loss: Z_0 and Z_1 shapes differ for clip " + clip.id);
  }
  const Conditioning cond = make_conditioning(model, clip, drop_conditions);
  const Tensor zt = Tensor::constant(interpolate_path(z0, z1, t));
  return flow_matching_loss(velocity(model.field, zt, t, cond), z1, z0);
}

void validate(const TrainConfig& c) {
  if (c.batch_size < 1 || c.epochs < 1 || c.draws_per_clip < 1 || c.jobs < 1) {
    throw ConfigError("train: batch_size, epochs, draws_per_clip and jobs must be >= 1");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (!(c.cond_drop_prob >= 0.0 && c.cond_drop_prob < 1.0)) {
    throw ConfigError("train: cond_drop_prob must lie in [0, 1)");
  }
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0 && c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must lie in [0, 1)");
  }
  if (c.clip_norm < 0.0) throw ConfigError("train: clip_norm must be >= 0");
}

namespace {

struct Draw {
  std::size_t clip = 0;
  double t = 0.0;
  RowMatrix z0;
  bool drop = false;
};

}  // namespace

TrainResult train(GacaModel& model, const std::vector<ClipData>& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  validate(config);
  if (dataset.empty()) throw ConfigError("train: dataset is empty");
  const Index latent_len = model.config.field.latent_len, latent_dim = model.config.field.latent_dim;
  for (const auto& clip : dataset) {
    if (clip.latent.length() != latent_len || clip.latent.dim() != latent_dim) {
      throw ConfigError("train: clip " + clip.id + " latent is " + std::to_string(clip.latent.length()) +
                        "x" + std::to_string(clip.latent.dim()) + ", model expects " +
                        std::to_string(latent_len) + "x" + std::to_string(latent_dim));
    }
  }

  const ParamSet params = model.params();
  const std::vector<Tensor> leaves = params.tensors();
  Adam adam(params, {config.learning_rate, config.adam_beta1, config.adam_beta2, 1e-8});
  Rng rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TrainResult result;
  std::vector<std::size_t> order(dataset.size());
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Draw> draws;
    for (std::size_t idx : order) {
      for (Index r = 0; r < config.draws_per_clip; ++r) {
        Draw d;
        d.clip = idx;
        d.t = unit(rng);
        d.z0 = normal_matrix(latent_len, latent_dim, 1.0, rng);
        d.drop = unit(rng) < config.cond_drop_prob;
        draws.push_back(std::move(d));
      }
    }

    double epoch_sum = 0.0;
    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0, b = 0; start < draws.size(); start += batch, ++b) {
      const std::size_t count = std::min(batch, draws.size() - start);
      std::vector<double> losses(count);
      std::vector<std::vector<Array>> grads(count);
      parallel_for(count, static_cast<std::size_t>(config.jobs), [&](std::size_t i) {
        const Draw& d = draws[start + i];
        Tape tape;
        TapeScope scope(tape);
        const Tensor loss = cfm_loss(model, dataset[d.clip], d.t, d.z0, d.drop);
        losses[i] = loss.item();
        grads[i] = tape.gradients(loss, leaves);
      });
      // Fixed summation order keeps parallel runs bit-identical to sequential ones.
      std::vector<Array> total = grads[0];
      for (std::size_t i = 1; i < count; ++i) {
        for (std::size_t p = 0; p < total.size(); ++p) total[p] += grads[i][p];
      }
      double batch_loss = 0.0;
      for (double l : losses) batch_loss += l;
      if (!std::isfinite(batch_loss) || !std::isfinite(global_norm(total))) {
        throw TrainingError("non-finite loss or gradient at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(b + 1));
      }
      for (auto& g : total) g /= static_cast<double>(count);
      if (config.clip_norm > 0.0) clip_global_norm(total, config.clip_norm);
      adam.step(total);
      epoch_sum += batch_loss;
    }
    const double epoch_mean = epoch_sum / static_cast<double>(draws.size());
    result.epoch_loss.push_back(epoch_mean);
    if (on_epoch) on_epoch(epoch, epoch_mean);
  }
  return result;
}

MusicLatent generate(const GacaModel& model, const ClipData& clip, const SampleConfig& config,
                     GenerationMode mode) {
  const Index latent_len = model.config.field.latent_len, latent_dim = model.config.field.latent_dim;
  const VelocityFn unconditional = [&](const RowMatrix& z, double t) {
    return RowMatrix(velocity(model.field, Tensor::constant(z), t, Conditioning{}).matrix());
  };
  if (mode == GenerationMode::unconditional) {
    return euler_sample({}, unconditional, latent_len, latent_dim, config);
  }
  const Conditioning cond = make_conditioning(model, clip, false);
  const VelocityFn conditional = [&](const RowMatrix& z, double t) {
    return RowMatrix(velocity(model.field, Tensor::constant(z), t, cond).matrix());
  };
  return euler_sample(conditional, unconditional, latent_len, latent_dim, config);
}

}  // namespace gaca
