#pragma once

#include <utility>
#include <vector>

#include "gaca/gare.hpp"
#include "gaca/nn.hpp"

namespace gaca {

/// Half-open frame interval [start, end).
struct Span {
  Index start = 0;
  Index end = 0;
  Index size() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Contiguous partition of [0, frames) into `count` spans; the first
/// frames % count spans are one frame longer.
std::vector<Span> segment_spans(Index frames, Index count);

struct ContextQueries {
  Tensor data;  // T_m x D
  Index count() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

/// Uniform(-1/sqrt(D), 1/sqrt(D)) initialization.
ContextQueries init_context_queries(Index count, Index dim, Rng& rng);

struct AlignedRhythm {
  Tensor data;  // T_m x D
  std::vector<Span> spans;
  Index length() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

/// softmax_j(r_j . q / sqrt(D)) weighted sum of segment rows (n x D) -> 1 x D.
Tensor attention_pool(const Tensor& segment, const Tensor& query);

AlignedRhythm align(const RhythmEmbedding& rhythm, const ContextQueries& queries);

/// Plain per-segment average, the downsampling baseline without queries.
AlignedRhythm mean_pool_align(const RhythmEmbedding& rhythm, Index count);

}  // namespace gaca
