#include "groundline/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace groundline {

TimeSegment::TimeSegment(double s, double e) : start(s), end(e) {
  if (!std::isfinite(s) || !std::isfinite(e))
    throw std::invalid_argument("TimeSegment: non-finite bound");
  if (s < 0.0 || e < 0.0)
    throw std::invalid_argument("TimeSegment: negative bound");
  if (s > e)
    throw std::invalid_argument("TimeSegment: start > end");
}

double iou(const TimeSegment& a, const TimeSegment& b) {
  const double inter_lo = std::max(a.start, b.start);
  const double inter_hi = std::min(a.end, b.end);
  const double inter = std::max(0.0, inter_hi - inter_lo);
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  if (uni <= 0.0) {
    // Both segments are points. Identical points overlap fully.
    return (a.start == b.start) ? 1.0 : 0.0;
  }
  return inter / uni;
}

TimeSegment frame_index_to_segment(std::size_t frame_index, double fps) {
  if (fps <= 0.0) throw std::invalid_argument("frame_index_to_segment: fps must be positive");
  const double j = static_cast<double>(frame_index);
  return TimeSegment(j / fps, (j + 1.0) / fps);
}

FrameTimeline::FrameTimeline(std::string video_id_, double fps_, double duration_,
                             std::vector<std::string> frame_refs_)
    : video_id(std::move(video_id_)),
      fps(fps_),
      duration(duration_),
      frame_refs(std::move(frame_refs_)) {
  if (!(fps > 0.0) || !std::isfinite(fps))
    throw std::invalid_argument("FrameTimeline: fps must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw std::invalid_argument("FrameTimeline: duration must be positive");
  if (frame_refs.empty())
    throw std::invalid_argument("FrameTimeline: at least one frame required");
  // Sampling may overrun the video by at most one frame period.
  const double n = static_cast<double>(frame_refs.size());
  if (n / fps > duration + 1.0 / fps + 1e-9)
    throw std::invalid_argument("FrameTimeline: frame count overruns duration for video '" +
                                video_id + "'");
}

Query::Query(std::string id, std::string text_) : query_id(std::move(id)), text(std::move(text_)) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    throw std::invalid_argument("Query: text empty after trimming");
}

SimilarityMatrix::SimilarityMatrix(std::vector<double> values_, std::size_t n_q_, std::size_t n_v_,
                                   std::vector<std::string> query_ids_, FrameTimeline timeline_)
    : values(std::move(values_)),
      n_q(n_q_),
      n_v(n_v_),
      query_ids(std::move(query_ids_)),
      timeline(std::move(timeline_)) {
  if (n_q == 0 || n_v == 0)
    throw std::invalid_argument("SimilarityMatrix: empty shape");
  if (values.size() != n_q * n_v)
    throw std::invalid_argument("SimilarityMatrix: value count does not match shape");
  if (!query_ids.empty() && query_ids.size() != n_q)
    throw std::invalid_argument("SimilarityMatrix: query id count does not match rows");
  if (timeline.n_frames() != n_v)
    throw std::invalid_argument("SimilarityMatrix: column count does not match timeline frames");
  for (double& v : values) {
    if (!std::isfinite(v))
      throw std::invalid_argument("SimilarityMatrix: non-finite entry");
    // Cosine of unit vectors can stray past 1 by rounding only.
    if (v > 1.0 && v < 1.0 + 1e-9) v = 1.0;
    if (v < -1.0 && v > -1.0 - 1e-9) v = -1.0;
    if (v > 1.0 || v < -1.0)
      throw std::invalid_argument("SimilarityMatrix: entry outside [-1, 1]");
  }
}

}  // namespace groundline
