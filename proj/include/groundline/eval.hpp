#pragma once

#include "groundline/core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace groundline {

struct MomentGroundTruth {
  std::string qid;
  std::vector<TimeSegment> segments;  // one or more relevant windows
  double duration = 0.0;
};

// Per 2-second clip, the raw annotator scores (0..4). Clips nobody
// annotated carry an empty list.
struct SaliencyGroundTruth {
  std::string qid;
  std::vector<std::vector<int>> clip_annotations;
};

struct Prediction {
  TimeSegment segment;
  double score = 0.0;
};

using PredictionMap = std::map<std::string, std::vector<Prediction>>;
using SaliencyPredictionMap = std::map<std::string, std::vector<double>>;

// Decides whether a clip counts as relevant from its annotator scores.
// Injected because the aggregation rule is a reproduction detail; the
// default calls a clip positive when any annotator scored 4 ("very good").
using VgPredicate = std::function<bool(const std::vector<int>&)>;
VgPredicate default_vg_predicate();

struct MetricReport {
  std::map<double, double> r1_at;   // threshold -> percentage in [0, 100]
  std::map<double, double> map_at;  // threshold -> AP fraction in [0, 1]
  double map_avg = 0.0;             // mean of map_at over the grid
  double miou = 0.0;                // stored in [0, 1], tables show x100
  std::optional<double> hd_map;     // fraction in [0, 1]
  std::optional<double> hd_hit1;    // percentage in [0, 100]
  std::size_t n_queries = 0;
};

struct EvalOptions {
  std::vector<double> iou_grid;        // defaults to 0.5:0.05:0.95
  std::vector<double> r1_thresholds;   // defaults to {0.3, 0.5, 0.7}
  bool strict_iou = false;             // compare IoU > m instead of >= m
  VgPredicate vg_predicate;            // defaults to default_vg_predicate()

  EvalOptions();
};

// Percentage of queries whose top-scored prediction reaches the IoU bar
// against the best ground-truth window. Missing predictions count as
// incorrect (with a warning).
double recall1(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts,
               double threshold, bool strict_iou = false);

struct DetectionMapResult {
  std::map<double, double> map_at;
  double map_avg = 0.0;
};

// Detection-style AP: score-ranked predictions greedily matched one-to-one
// to ground-truth windows, precision accumulated at true-positive ranks and
// normalized by the ground-truth count, macro-averaged over queries.
DetectionMapResult detection_map(const PredictionMap& preds,
                                 const std::vector<MomentGroundTruth>& gts,
                                 const std::vector<double>& grid, bool strict_iou = false);

// Mean over queries of IoU between the top prediction and its best window.
double mean_iou(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts);

struct HdResult {
  double hd_map = 0.0;   // fraction
  double hd_hit1 = 0.0;  // percentage
  std::size_t n_scored = 0;
  std::size_t n_excluded = 0;  // queries with no positive clip
};

// Highlight detection: AP of the predicted clip ranking against the
// positive-clip labels and the hit rate of the argmax clip.
HdResult hd_metrics(const SaliencyPredictionMap& pred_saliency,
                    const std::vector<SaliencyGroundTruth>& gts, const VgPredicate& vg);

MetricReport evaluate(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts,
                      const SaliencyPredictionMap& pred_saliency,
                      const std::vector<SaliencyGroundTruth>& saliency_gts,
                      const EvalOptions& options);

// Report renderings: a human table (fractional metrics shown x100) and the
// JSON document written beside it.
std::string report_table(const MetricReport& report);
std::string report_json(const MetricReport& report);

}  // namespace groundline
