#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gaca/cfm.hpp"
#include "gaca/metrics.hpp"
#include "gaca/model.hpp"
#include "gaca/pose.hpp"

namespace gaca {

/// Every tunable of the pipeline. Defaults follow the published setup where
/// it states a value and desk-scale choices otherwise (see `describe`).
struct RunConfig {
  // Benchmark synthesis.
  double tempo_min = 60.0;
  double tempo_max = 180.0;
  double duration_s = 5.0;
  double fps = 30.0;
  Index joints = 17;
  Index beat_joints = 6;
  double amplitude = 0.1;
  double noise_std = 0.001;
  Index cond_len = 10;
  Index cond_dim = 16;
  Index latent_len = 50;
  Index latent_dim = 8;
  double latent_noise = 0.1;
  double pulse_width = 0.6;

  // Rhythm extraction and alignment.
  Index scales = 4;
  double base_period = 4.0;
  Index bins = 8;
  Index rhythm_dim = 64;
  Index weight_hidden = 16;
  Index attn_hidden = 16;
  RhythmSource rhythm = RhythmSource::gare;
  Alignment alignment = Alignment::cata;
  bool use_features = true;

  // Velocity field.
  Index blocks = 2;
  Index hidden = 64;
  Index heads = 4;
  Index ffn_mult = 2;

  // Training and sampling.
  TrainConfig train{.batch_size = 4, .epochs = 30, .learning_rate = 1e-3, .draws_per_clip = 16};
  SampleConfig sample;

  // Evaluation.
  Index window_frames = 3;
  double smooth_sigma = 1.0;
  Index min_separation = 5;
  double rel_threshold = 0.5;

  std::uint64_t seed = 0;
  Index jobs = 1;

  ModelConfig model_config() const;
  DanceBeatConfig dance_beat_config() const { return {smooth_sigma, min_separation}; }
  double latent_fps() const { return static_cast<double>(latent_len) / duration_s; }
  /// Scoring window on the latent timeline: window_frames rescaled, at least 1.
  Index latent_window() const;
};

/// Re-checks every referenced type's constraints; throws ConfigError.
void validate(const RunConfig& config);

/// Applies one `key=value` assignment; unknown keys throw ConfigError.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key=value` lines ('#' comments and blank lines ignored) over `base`.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Ordered (key, value) pairs for every tunable.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// `key=value  # note` lines, the note stating whether the default is a published value.
std::string describe(const RunConfig& config);

}  // namespace gaca
