#pragma once

#include "groundline/core.hpp"
#include "groundline/eval.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace groundline {

// One query against one video, normalized across dataset formats.
struct DatasetRecord {
  std::string qid;
  bool qid_is_int = false;  // emit back as a JSON number when true
  std::string video_id;
  std::string query;
  double duration = 0.0;
  std::vector<TimeSegment> windows;
  std::vector<int> relevant_clip_ids;           // may be empty
  std::vector<std::vector<int>> saliency_scores;  // aligned with relevant_clip_ids
  nlohmann::json extra = nlohmann::json::object();  // unrecognized fields, kept for round-trips
};

struct LoadOptions {
  bool permit_zero_length = false;  // keep zero-length windows instead of dropping them
};

// moment_detr-style JSONL: one object per query with qid/query/vid/duration/
// relevant_windows and optional saliency fields. Windows are clipped to
// [0, duration] with a warning; windows empty after clipping are dropped.
std::vector<DatasetRecord> load_qvhighlights(const std::string& path,
                                             const LoadOptions& options = {});

// Annotation lines "VIDEOID START END##query" plus a JSON sidecar mapping
// video id -> duration in seconds. qids are "{video_id}#{k}" by line order
// within the video.
std::vector<DatasetRecord> load_charades_sta(const std::string& annotations_path,
                                             const std::string& durations_path,
                                             const LoadOptions& options = {});

// Dense-captions JSON: {video_id: {duration, timestamps, sentences}}. Each
// sentence becomes its own record with qid "{video_id}#{k}".
std::vector<DatasetRecord> load_activitynet(const std::string& path,
                                            const LoadOptions& options = {});

std::vector<MomentGroundTruth> records_to_ground_truth(const std::vector<DatasetRecord>& records);

// Expands (relevant_clip_ids, saliency_scores) pairs into dense per-clip
// annotation lists of length ceil(duration / clip_seconds). Records without
// saliency fields are skipped.
std::vector<SaliencyGroundTruth> records_to_saliency(const std::vector<DatasetRecord>& records,
                                                     double clip_seconds = 2.0);

// Prediction JSONL compatible with the QVHighlights submission format:
// {"qid": ..., "pred_relevant_windows": [[start, end, score], ...],
//  "pred_saliency_scores": [...]}. qid is re-emitted as a number for records
// loaded with integer qids.
void write_predictions_jsonl(const std::string& path, const std::vector<DatasetRecord>& records,
                             const PredictionMap& preds,
                             const SaliencyPredictionMap& saliency);

// Reads a prediction JSONL back into evaluation inputs.
void read_predictions_jsonl(const std::string& path, PredictionMap& preds,
                            SaliencyPredictionMap& saliency);

}  // namespace groundline
