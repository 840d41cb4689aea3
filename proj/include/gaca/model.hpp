#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gaca/cata.hpp"
#include "gaca/cfm.hpp"
#include "gaca/gare.hpp"

namespace gaca {

/// Where the latent-timeline rhythm condition comes from.
enum class RhythmSource {
  none,           // conditioning features only
  gare,           // wavelet + phase-histogram extraction
  global_motion,  // clip-level mean joint speed, broadcast over time
  binary_diff,    // per-joint binarized first-difference speed
};

enum class Alignment {
  cata,       // learnable query attention pooling
  mean_pool,  // plain per-segment average
};

std::string to_string(RhythmSource s);
std::string to_string(Alignment a);
RhythmSource parse_rhythm_source(const std::string& s);
Alignment parse_alignment(const std::string& s);

struct ModelConfig {
  GareConfig gare;
  VelocityConfig field;
  RhythmSource rhythm = RhythmSource::gare;
  Alignment alignment = Alignment::cata;
  bool use_features = true;
  Index joints = 17;
};

void validate(const ModelConfig& config);

/// All three learnable groups plus the fixed wavelet bank.
struct GacaModel {
  ModelConfig config;
  WaveletBank bank;
  GareParams gare;
  ContextQueries queries;
  VelocityFieldParams field;
  Linear baseline_proj;  // J -> D, used by the baseline rhythm sources

  /// Parameters that the configured variant actually uses, in checkpoint order.
  ParamSet params() const;
  /// Every parameter tensor regardless of variant.
  ParamSet all_params() const;
};

GacaModel init_model(const ModelConfig& config, std::uint64_t seed);

/// Pose-derived constants for one clip, computed once.
struct ClipData {
  std::string id;
  GareInputs gare_inputs;
  RowMatrix global_feature;  // T x J
  RowMatrix binary_feature;  // T x J
  ConditioningFeatures features;
  MusicLatent latent;
};

ClipData prepare_clip(std::string id, const PoseSequence& pose, const ConditioningFeatures& features,
                      const MusicLatent& latent, const WaveletBank& bank);

/// T x D rhythm embedding of the configured source (undefined for RhythmSource::none).
RhythmEmbedding rhythm_embedding(const GacaModel& model, const ClipData& clip);
/// Latent-timeline rhythm condition (undefined for RhythmSource::none).
Tensor aligned_rhythm(const GacaModel& model, const ClipData& clip);

Conditioning make_conditioning(const GacaModel& model, const ClipData& clip, bool drop);

/// Flow-matching loss for one draw: Z_t on the linear path, target Z_1 - Z_0,
/// differentiable through the field, the alignment and the rhythm extractor.
Tensor cfm_loss(const GacaModel& model, const ClipData& clip, double t, const RowMatrix& z0,
                bool drop_conditions = false);

struct TrainConfig {
  Index batch_size = 4;
  Index epochs = 100;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  double cond_drop_prob = 0.1;
  /// Independent (t, Z_0) draws per clip per epoch.
  Index draws_per_clip = 1;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  Index jobs = 1;
};

void validate(const TrainConfig& config);

struct TrainResult {
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(Index epoch, double mean_loss)>;

TrainResult train(GacaModel& model, const std::vector<ClipData>& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

enum class GenerationMode {
  guided,         // classifier-free guidance toward the clip's conditions
  unconditional,  // null tokens only
};

MusicLatent generate(const GacaModel& model, const ClipData& clip, const SampleConfig& config,
                     GenerationMode mode = GenerationMode::guided);

}  // namespace gaca
