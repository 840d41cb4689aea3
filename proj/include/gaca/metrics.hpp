#pragma once

#include <vector>

#include "gaca/pose.hpp"

namespace gaca {

struct DanceBeatConfig {
  double smooth_sigma = 1.0;  // frames; 0 disables smoothing
  Index min_separation = 5;   // frames
};

/// Interior local minima of the Gaussian-smoothed, joint-summed speed.
/// Candidates are accepted deepest first and must keep `min_separation`
/// frames from every accepted beat. Beat frame t is motion step t.
BeatGrid detect_dance_beats(const PoseSequence& pose, const DanceBeatConfig& config = {});

/// Local maxima of channel 0 at or above rel_threshold * global max.
/// Boundary samples may be peaks; an all-nonpositive channel yields no beats.
BeatGrid detect_latent_beats(const MusicLatent& latent, double fps, double rel_threshold = 0.5);

struct BeatScores {
  double bcs = 0.0;
  double bhs = 0.0;
  double f1 = 0.0;
  Index generated = 0;  // B_g
  Index truth = 0;      // B_t
  Index aligned = 0;    // B_a
};

/// Greedy in-order one-to-one matching within +-window frames.
Index match_beats(const std::vector<Index>& generated, const std::vector<Index>& truth,
                  Index window_frames);

BeatScores beat_scores(const BeatGrid& generated, const BeatGrid& truth, Index window_frames);

struct ScoreAggregate {
  double mean_bcs = 0.0;
  double mean_bhs = 0.0;
  double mean_f1 = 0.0;
  double csd = 0.0;
  double hsd = 0.0;
  Index clips = 0;
};

/// Means plus sample standard deviations (n-1 denominator, 0 for one clip).
ScoreAggregate aggregate(const std::vector<BeatScores>& scores);

}  // namespace gaca
