#include "gaca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaca/tensor.hpp"

namespace gaca {

namespace {

Array gaussian_smooth(const Array& x, double sigma) {
  if (sigma <= 0.0) return x;
  const Index half = static_cast<Index>(std::ceil(3.0 * sigma));
  Array k(2 * half + 1);
  for (Index i = 0; i < k.size(); ++i) {
    const double u = static_cast<double>(i - half);
    k[i] = std::exp(-u * u / (2.0 * sigma * sigma));
  }
  k /= k.sum();
  const Index n = x.size();
  Array y = Array::Zero(n);
  for (Index t = 0; t < n; ++t) {
    for (Index u = 0; u < k.size(); ++u) y[t] += k[u] * x[reflect_index(t + u - half, n)];
  }
  return y;
}

}  // namespace

BeatGrid detect_dance_beats(const PoseSequence& pose, const DanceBeatConfig& config) {
  if (pose.frames < 3) throw ConfigError("detect_dance_beats: need at least 3 frames");
  const MotionField motion = motion_diff(pose);
  const Array speed = gaussian_smooth(motion.magnitude.rowwise().sum().array(), config.smooth_sigma);
  const Index n = speed.size();

  std::vector<Index> candidates;
  for (Index t = 1; t + 1 < n; ++t) {
    const bool le = speed[t] <= speed[t - 1] && speed[t] <= speed[t + 1];
    const bool strict = speed[t] < speed[t - 1] || speed[t] < speed[t + 1];
    if (le && strict) candidates.push_back(t);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](Index a, Index b) { return speed[a] < speed[b]; });
  std::vector<Index> kept;
  for (Index c : candidates) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](Index k) {
      return std::abs(k - c) >= config.min_separation;
    });
    if (clear) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return {std::move(kept), pose.frames, pose.fps};
}

BeatGrid detect_latent_beats(const MusicLatent& latent, double fps, double rel_threshold) {
  const Index n = latent.length();
  if (n < 1) throw ConfigError("detect_latent_beats: empty latent");
  BeatGrid grid{{}, n, fps};
  const auto c = latent.data.col(0);
  const double peak = c.maxCoeff();
  if (peak <= 0.0) return grid;
  const double floor = rel_threshold * peak;
  for (Index i = 0; i < n; ++i) {
    const bool rises = i == 0 || c[i] > c[i - 1];
    const bool holds = i == n - 1 || c[i] >= c[i + 1];
    if (rises && holds && c[i] >= floor && c[i] > 0.0) grid.beat_frames.push_back(i);
  }
  return grid;
}

Index match_beats(const std::vector<Index>& generated, const std::vector<Index>& truth,
                  Index window_frames) {
  Index aligned = 0;
  std::size_t i = 0, j = 0;
  while (i < generated.size() && j < truth.size()) {
    const Index g = generated[i], t = truth[j];
    if (std::abs(g - t) <= window_frames) {
      ++aligned;
      ++i;
      ++j;
    } else if (g < t) {
      ++i;  // g cannot reach this or any later truth beat
    } else {
      ++j;
    }
  }
  return aligned;
}

BeatScores beat_scores(const BeatGrid& generated, const BeatGrid& truth, Index window_frames) {
  if (generated.timeline_len != truth.timeline_len) {
    throw ConfigError("beat_scores: timeline lengths differ (" + std::to_string(generated.timeline_len) +
                      " vs " + std::to_string(truth.timeline_len) + ")");
  }
  if (std::abs(generated.fps - truth.fps) > 1e-9 * std::max(1.0, std::abs(truth.fps))) {
    throw ConfigError("beat_scores: fps differs (" + format_real(generated.fps) + " vs " +
                      format_real(truth.fps) + ")");
  }
  if (window_frames < 0) throw ConfigError("beat_scores: window must be nonnegative");
  BeatScores s;
  s.generated = static_cast<Index>(generated.beat_frames.size());
  s.truth = static_cast<Index>(truth.beat_frames.size());
  s.aligned = match_beats(generated.beat_frames, truth.beat_frames, window_frames);
  s.bcs = s.generated > 0 ? 100.0 * static_cast<double>(s.aligned) / static_cast<double>(s.generated) : 0.0;
  s.bhs = s.truth > 0 ? 100.0 * static_cast<double>(s.aligned) / static_cast<double>(s.truth) : 0.0;
  s.f1 = s.bcs + s.bhs > 0.0 ? 2.0 * s.bcs * s.bhs / (s.bcs + s.bhs) : 0.0;
  return s;
}

ScoreAggregate aggregate(const std::vector<BeatScores>& scores) {
  if (scores.empty()) throw ConfigError("aggregate: no clips");
  ScoreAggregate a;
  a.clips = static_cast<Index>(scores.size());
  const double n = static_cast<double>(scores.size());
  for (const auto& s : scores) {
    a.mean_bcs += s.bcs / n;
    a.mean_bhs += s.bhs / n;
    a.mean_f1 += s.f1 / n;
  }
  if (scores.size() > 1) {
    double vc = 0.0, vh = 0.0;
    for (const auto& s : scores) {
      vc += (s.bcs - a.mean_bcs) * (s.bcs - a.mean_bcs);
      vh += (s.bhs - a.mean_bhs) * (s.bhs - a.mean_bhs);
    }
    a.csd = std::sqrt(vc / (n - 1.0));
    a.hsd = std::sqrt(vh / (n - 1.0));
  }
  return a;
}

}  // namespace gaca
