#include "gaca/cata.hpp"

#include <cmath>

namespace gaca {

std::vector<Span> segment_spans(Index frames, Index count) {
  if (count < 1) throw ConfigError("segment_spans: need at least one segment");
  if (count > frames) {
    throw ConfigError("segment_spans: " + std::to_string(count) + " segments exceed " +
                      std::to_string(frames) + " frames");
  }
  const Index base = frames / count, extra = frames % count;
  std::vector<Span> spans;
  spans.reserve(static_cast<std::size_t>(count));
  Index start = 0;
  for (Index i = 0; i < count; ++i) {
    const Index len = base + (i < extra ? 1 : 0);
    spans.push_back({start, start + len});
    start += len;
  }
  return spans;
}

ContextQueries init_context_queries(Index count, Index dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  return {Tensor::parameter(uniform_matrix(count, dim, bound, rng))};
}

Tensor attention_pool(const Tensor& segment, const Tensor& query) {
  if (segment.cols() != query.size()) {
    throw DimensionError("attention_pool: segment " + shape_string(segment.shape()) +
                         " vs query " + shape_string(query.shape()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(segment.cols()));
  const Tensor q = reshape(query, {query.size(), 1});
  const Tensor scores = scale(matmul(segment, q), inv_sqrt_d);  // n x 1
  const Tensor weights = softmax(scores, 0);
  return matmul(transpose(weights), segment);
}

AlignedRhythm align(const RhythmEmbedding& rhythm, const ContextQueries& queries) {
  if (queries.dim() != rhythm.dim()) {
    throw ConfigError("align: query dim " + std::to_string(queries.dim()) +
                      " differs from rhythm dim " + std::to_string(rhythm.dim()));
  }
  AlignedRhythm out;
  out.spans = segment_spans(rhythm.length(), queries.count());
  std::vector<Tensor> rows;
  rows.reserve(out.spans.size());
  for (std::size_t i = 0; i < out.spans.size(); ++i) {
    const Span& s = out.spans[i];
    rows.push_back(attention_pool(slice_rows(rhythm.data, s.start, s.size()),
                                  slice_rows(queries.data, static_cast<Index>(i), 1)));
  }
  out.data = concat_rows(rows);
  return out;
}

AlignedRhythm mean_pool_align(const RhythmEmbedding& rhythm, Index count) {
  AlignedRhythm out;
  out.spans = segment_spans(rhythm.length(), count);
  RowMatrix pool = RowMatrix::Zero(count, rhythm.length());
  for (Index i = 0; i < count; ++i) {
    const Span& s = out.spans[static_cast<std::size_t>(i)];
    pool.row(i).segment(s.start, s.size()).setConstant(1.0 / static_cast<double>(s.size()));
  }
  out.data = matmul(Tensor::constant(pool), rhythm.data);
  return out;
}

}  // namespace gaca
