#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace groundline {

// A [start, end] interval in seconds. The universal unit of grounding
// output and ground truth.
struct TimeSegment {
  double start = 0.0;
  double end = 0.0;

  TimeSegment() = default;
  TimeSegment(double s, double e);

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
};

// Intersection-over-union of two segments, in [0, 1].
// Two identical zero-length segments count as 1; a point segment against
// anything not containing it counts as 0.
double iou(const TimeSegment& a, const TimeSegment& b);

// Frame j at a given sampling rate stands for [j/fps, (j+1)/fps].
TimeSegment frame_index_to_segment(std::size_t frame_index, double fps);

// Ordered frame references of one sampled video. Frames are opaque paths;
// no pixel data is ever held here.
struct FrameTimeline {
  std::string video_id;
  double fps = 0.0;
  double duration = 0.0;
  std::vector<std::string> frame_refs;

  FrameTimeline() = default;
  FrameTimeline(std::string video_id, double fps, double duration,
                std::vector<std::string> frame_refs);

  std::size_t n_frames() const { return frame_refs.size(); }
};

struct Query {
  std::string query_id;
  std::string text;

  Query() = default;
  Query(std::string id, std::string text);
};

// N_q x N_v matrix of query-frame cosine scores, row-major. The sole input
// the grounding core needs.
struct SimilarityMatrix {
  std::vector<double> values;  // row-major, n_q * n_v
  std::size_t n_q = 0;
  std::size_t n_v = 0;
  std::vector<std::string> query_ids;
  FrameTimeline timeline;

  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<double> values, std::size_t n_q, std::size_t n_v,
                   std::vector<std::string> query_ids, FrameTimeline timeline);

  double at(std::size_t i, std::size_t j) const { return values[i * n_v + j]; }
  // Row i as a contiguous view.
  const double* row(std::size_t i) const { return values.data() + i * n_v; }
};

}  // namespace groundline
