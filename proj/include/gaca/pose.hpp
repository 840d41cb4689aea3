#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "gaca/tensor.hpp"

namespace gaca {

/// T x J x C keypoint trajectory, stored frame-major then joint then coordinate.
struct PoseSequence {
  Index frames = 0;
  Index joints = 0;
  Index coords = 2;
  double fps = 30.0;
  Array data;

  double at(Index t, Index j, Index c) const { return data[(t * joints + j) * coords + c]; }
  double& at(Index t, Index j, Index c) { return data[(t * joints + j) * coords + c]; }
};

/// Throws ConfigError when T < 2, J < 1, C not in {2,3}, fps <= 0 or values are non-finite.
void validate(const PoseSequence& pose);

/// Frame-wise displacement and per-joint speed over T-1 steps.
struct MotionField {
  Index steps = 0;
  Index joints = 0;
  Index coords = 2;
  Array diffs;          // steps x joints x coords
  RowMatrix magnitude;  // steps x joints

  double diff(Index t, Index j, Index c) const { return diffs[(t * joints + j) * coords + c]; }
  /// steps x joints matrix of coordinate `c`.
  RowMatrix component(Index c) const;
};

struct BeatGrid {
  std::vector<Index> beat_frames;
  Index timeline_len = 0;
  double fps = 30.0;
};

void validate(const BeatGrid& grid);

struct ConditioningFeatures {
  RowMatrix data;  // T_v x D_v
};

struct MusicLatent {
  RowMatrix data;  // T_m x d
  Index length() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

MotionField motion_diff(const PoseSequence& pose);

struct SynthDanceConfig {
  double tempo_bpm = 120.0;
  double duration_s = 5.0;
  double fps = 30.0;
  Index joints = 17;
  Index coords = 2;
  /// Joints [0, beat_joints) carry the beat; the rest drift at constant velocity.
  Index beat_joints = 6;
  double amplitude = 0.1;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

/// Beat frames for a clip of `frames` frames: one kinematic beat every
/// 60*fps/tempo frames, first beat half a period in, all strictly interior to
/// the T-1 motion steps.
std::vector<Index> synth_beat_frames(double tempo_bpm, double fps, Index frames);

std::pair<PoseSequence, BeatGrid> synth_dance(const SynthDanceConfig& config);

struct SynthLatentConfig {
  double pulse_width = 0.6;  // Gaussian sigma in latent steps
  double noise_std = 0.1;
};

/// Latent frame for pose frame `f` on a timeline of `timeline_len` frames.
Index latent_index(Index frame, Index timeline_len, Index latent_len);

MusicLatent synth_latent(const BeatGrid& beats, Index latent_len, Index dim, std::uint64_t seed,
                         const SynthLatentConfig& config = {});

ConditioningFeatures synth_conditioning(Index length, Index dim, std::uint64_t seed);

// Text formats. Parsers report the offending line number.
PoseSequence parse_pose_sequence(std::istream& in, std::optional<double> fps = std::nullopt);
PoseSequence load_pose_sequence(const std::filesystem::path& path,
                                std::optional<double> fps = std::nullopt);
void save_pose_sequence(const PoseSequence& pose, const std::filesystem::path& path);

ConditioningFeatures parse_conditioning(std::istream& in);
ConditioningFeatures load_conditioning(const std::filesystem::path& path);
void save_conditioning(const ConditioningFeatures& cond, const std::filesystem::path& path);

BeatGrid parse_beat_grid(std::istream& in);
BeatGrid load_beat_grid(const std::filesystem::path& path);
void save_beat_grid(const BeatGrid& grid, const std::filesystem::path& path);

MusicLatent parse_latent(std::istream& in);
MusicLatent load_latent(const std::filesystem::path& path);
void save_latent(const MusicLatent& latent, const std::filesystem::path& path);

/// Header `rows cols fps` followed by one row per line (rhythm exports).
void save_feature_table(const RowMatrix& m, double fps, const std::filesystem::path& path);
std::pair<RowMatrix, double> load_feature_table(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_real(double v);

}  // namespace gaca
