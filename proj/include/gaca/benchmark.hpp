#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaca/config.hpp"
#include "gaca/metrics.hpp"
#include "gaca/model.hpp"

namespace gaca {

/// splitmix64 of (master, stream, index); decorrelates per-clip and per-stage seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

namespace seed_stream {
inline constexpr std::uint64_t tempo = 1;
inline constexpr std::uint64_t dance = 2;
inline constexpr std::uint64_t latent = 3;
inline constexpr std::uint64_t features = 4;
inline constexpr std::uint64_t init = 5;
inline constexpr std::uint64_t train = 6;
inline constexpr std::uint64_t sample = 7;
}  // namespace seed_stream

struct BenchmarkClip {
  std::string id;
  double tempo_bpm = 0.0;
  std::uint64_t seed = 0;
  PoseSequence pose;
  BeatGrid beats;
  MusicLatent latent;
  ConditioningFeatures features;
};

std::vector<BenchmarkClip> synth_benchmark(const RunConfig& config, Index clips, std::uint64_t master_seed);

/// Writes clip_NNN.{pose,latent,beats,cond} and manifest.txt. A non-empty
/// directory is refused unless `force`.
void write_benchmark(const std::vector<BenchmarkClip>& clips, const std::filesystem::path& dir, bool force);
std::vector<BenchmarkClip> load_benchmark(const std::filesystem::path& dir);

std::vector<ClipData> prepare_clips(const std::vector<BenchmarkClip>& clips, const WaveletBank& bank,
                                    Index jobs = 1);

/// Ground-truth beats rescaled onto the latent timeline (collisions merged).
BeatGrid latent_beat_grid(const BeatGrid& beats, const RunConfig& config);

struct ClipEvaluation {
  std::string id;
  BeatScores scores;
};

/// Scores detected latent beats of `generated[i]` against clip i's ground truth.
std::vector<ClipEvaluation> evaluate_latents(const std::vector<BenchmarkClip>& clips,
                                             const std::vector<MusicLatent>& generated,
                                             const RunConfig& config);

ScoreAggregate aggregate(const std::vector<ClipEvaluation>& evals);

/// Per-clip table plus the aggregate (BCS, CSD, BHS, HSD, F1) row.
std::string format_report(const std::vector<ClipEvaluation>& evals);
/// One CSV record per clip, header included.
std::string format_report_csv(const std::vector<ClipEvaluation>& evals);
std::string format_aggregate_row(const std::string& label, const ScoreAggregate& agg);

std::vector<MusicLatent> generate_all(const GacaModel& model, const std::vector<ClipData>& clips,
                                      const RunConfig& config, GenerationMode mode);

GacaModel train_model(const RunConfig& config, const std::vector<ClipData>& train_clips,
                      TrainResult* history = nullptr);

struct AblationRow {
  std::string label;
  ScoreAggregate scores;
};

struct AblationReport {
  std::vector<AblationRow> components;  // unconditional, conditioning only, +GARE, +GARE+CATA
  std::vector<AblationRow> features;    // global motion, binarized difference, GARE
};

/// Trains each variant on `train_clips` and scores it on `eval_clips`.
AblationReport run_ablation(const RunConfig& config, const std::vector<BenchmarkClip>& train_clips,
                            const std::vector<BenchmarkClip>& eval_clips);

std::string format_ablation(const AblationReport& report);

}  // namespace gaca
