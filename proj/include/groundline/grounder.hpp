#pragma once

#include "groundline/core.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace groundline {

struct GeneratorConfig {
  std::size_t n_bins = 10;     // histogram bins
  std::size_t top_k = 8;       // k-th largest value picks the threshold bin
  std::size_t gap_lambda = 6;  // longest sub-threshold run bridged inside one proposal

  void validate() const;
};

// How a proposal's similarity score aggregates its frames. The default uses
// the relevant frames only, so bridged low-similarity frames cannot dilute
// the score; the alternatives exist for ablation.
enum class SimAggregate { relevant_mean, extent_mean, max_value };

const char* sim_aggregate_name(SimAggregate mode);
SimAggregate sim_aggregate_from(const std::string& name);

struct ScorerConfig {
  double alpha = 0.5;  // weight of the length score against the similarity score
  SimAggregate sim_aggregate = SimAggregate::relevant_mean;

  void validate() const;
};

struct NmsConfig {
  double iou_threshold = 0.75;  // proposals overlapping a kept one beyond this are dropped

  void validate() const;
};

// One candidate segment from scanning a single similarity row.
struct Proposal {
  std::size_t query_index = 0;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // inclusive
  TimeSegment segment;        // [start_frame/fps, (end_frame+1)/fps]
};

struct ScoredProposal {
  Proposal proposal;
  double s_length = 0.0;      // L_p / L_n
  double s_similarity = 0.0;  // mean similarity over the relevant frames inside
  double s_fused = 0.0;       // alpha * s_length + (1 - alpha) * s_similarity
};

// Lower edge of the histogram bin holding the k-th largest row value.
// Equal-width bins over [min, max] with the rightmost bin closed; k is
// clamped to the row length. A constant row thresholds at its value.
double dynamic_threshold(std::span<const double> row, const GeneratorConfig& config);

// Left-to-right scan: frames with value >= theta are relevant; sub-threshold
// runs of length <= lambda are bridged, a longer run closes the proposal at
// the last relevant frame.
std::vector<Proposal> scan_proposals(std::span<const double> row, double theta,
                                     std::size_t gap_lambda, std::size_t query_index,
                                     double fps = 1.0);

ScoredProposal score_proposal(const Proposal& p, std::span<const double> row, double theta,
                              const ScorerConfig& config);

// Greedy NMS: keep best by fused score, drop everything overlapping it past
// the IoU threshold. Ties break by earlier start, then shorter segment,
// then lower query index, making the result platform-stable.
std::vector<ScoredProposal> nms(std::vector<ScoredProposal> proposals, const NmsConfig& config);

struct RankedSegment {
  TimeSegment segment;
  double score = 0.0;
};

// Full per-query pipeline over one similarity matrix: per-row threshold,
// scan, score, pool across rows, NMS, convert to seconds.
std::vector<RankedSegment> ground(const SimilarityMatrix& matrix, const GeneratorConfig& gen,
                                  const ScorerConfig& scorer, const NmsConfig& nms_config);

// Column-wise mean over the rephrasing rows; the highlight-detection output.
std::vector<double> saliency(const SimilarityMatrix& matrix);

}  // namespace groundline
