#include "groundline/data_io.hpp"

#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace groundline {

namespace {

// Known QVHighlights fields; everything else is preserved in `extra`.
const std::set<std::string> kKnownFields = {"qid",          "query",
                                            "vid",          "duration",
                                            "relevant_windows", "relevant_clip_ids",
                                            "saliency_scores"};

std::vector<TimeSegment> clip_windows(const std::string& qid,
                                      const std::vector<std::pair<double, double>>& raw,
                                      double duration, const LoadOptions& options) {
  std::vector<TimeSegment> out;
  for (auto [start, end] : raw) {
    if (!std::isfinite(start) || !std::isfinite(end) || end < start)
      throw SchemaError("qid " + qid + ": malformed window [" + std::to_string(start) + ", " +
                        std::to_string(end) + "]");
    double s = start;
    double e = end;
    if (s < 0.0 || e > duration) {
      s = std::max(0.0, s);
      e = std::min(duration, e);
      warn("qid " + qid + ": window clipped to [" + std::to_string(s) + ", " + std::to_string(e) +
           "]");
    }
    if (e <= s && !options.permit_zero_length) {
      warn("qid " + qid + ": dropping empty window");
      continue;
    }
    if (e < s) continue;  // fully outside the video even when zero-length is permitted
    out.emplace_back(s, e);
  }
  return out;
}

double require_duration(const std::string& qid, double duration) {
  if (!std::isfinite(duration) || duration <= 0.0)
    throw SchemaError("qid " + qid + ": duration must be positive");
  return duration;
}

}  // namespace

std::vector<DatasetRecord> load_qvhighlights(const std::string& path, const LoadOptions& options) {
  std::vector<DatasetRecord> records;
  std::size_t line_no = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line_no;
    DatasetRecord rec;
    try {
      if (!j.contains("qid")) throw SchemaError("missing qid");
      if (j["qid"].is_number_integer()) {
        rec.qid = std::to_string(j["qid"].get<long long>());
        rec.qid_is_int = true;
      } else if (j["qid"].is_string()) {
        rec.qid = j["qid"].get<std::string>();
      } else {
        throw SchemaError("qid must be an integer or string");
      }
      rec.query = j.at("query").get<std::string>();
      rec.video_id = j.at("vid").get<std::string>();
      rec.duration = require_duration(rec.qid, j.at("duration").get<double>());
      std::vector<std::pair<double, double>> raw;
      for (const auto& w : j.at("relevant_windows")) {
        if (!w.is_array() || w.size() != 2) throw SchemaError("relevant_windows entries need 2 values");
        raw.emplace_back(w[0].get<double>(), w[1].get<double>());
      }
      rec.windows = clip_windows(rec.qid, raw, rec.duration, options);
      if (j.contains("relevant_clip_ids"))
        rec.relevant_clip_ids = j["relevant_clip_ids"].get<std::vector<int>>();
      if (j.contains("saliency_scores"))
        rec.saliency_scores = j["saliency_scores"].get<std::vector<std::vector<int>>>();
      if (rec.saliency_scores.size() != rec.relevant_clip_ids.size())
        throw SchemaError("saliency_scores and relevant_clip_ids disagree in length");
      for (const auto& [key, value] : j.items())
        if (kKnownFields.count(key) == 0) rec.extra[key] = value;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + " record " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path + " record " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.windows.empty()) {
      warn("qid " + rec.qid + ": no usable window, record dropped");
      continue;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> load_charades_sta(const std::string& annotations_path,
                                             const std::string& durations_path,
                                             const LoadOptions& options) {
  nlohmann::json durations;
  try {
    durations = nlohmann::json::parse(read_file(durations_path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(durations_path + ": " + e.what());
  }
  if (!durations.is_object()) throw SchemaError(durations_path + ": expected an object");

  std::ifstream in(annotations_path);
  if (!in) throw ParseError("cannot open " + annotations_path);
  std::vector<DatasetRecord> records;
  std::map<std::string, int> per_video;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto where = [&] { return annotations_path + ":" + std::to_string(line_no); };
    auto sep = line.find("##");
    if (sep == std::string::npos) throw SchemaError(where() + ": missing \"##\" separator");
    std::istringstream head(line.substr(0, sep));
    DatasetRecord rec;
    double start = 0.0;
    double end = 0.0;
    if (!(head >> rec.video_id >> start >> end))
      throw SchemaError(where() + ": expected \"VIDEOID START END\"");
    rec.query = line.substr(sep + 2);
    while (!rec.query.empty() && (rec.query.back() == '\r' || rec.query.back() == ' '))
      rec.query.pop_back();
    if (rec.query.empty()) throw SchemaError(where() + ": empty query");
    if (!durations.contains(rec.video_id))
      throw SchemaError(where() + ": no duration for video " + rec.video_id);
    rec.qid = rec.video_id + "#" + std::to_string(per_video[rec.video_id]++);
    rec.duration = require_duration(rec.qid, durations[rec.video_id].get<double>());
    rec.windows = clip_windows(rec.qid, {{start, end}}, rec.duration, options);
    if (rec.windows.empty()) {
      warn("qid " + rec.qid + ": no usable window, record dropped");
      continue;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> load_activitynet(const std::string& path, const LoadOptions& options) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError(path + ": expected an object keyed by video id");
  std::vector<DatasetRecord> records;
  for (const auto& [video_id, entry] : j.items()) {
    try {
      double duration = require_duration(video_id, entry.at("duration").get<double>());
      const auto& timestamps = entry.at("timestamps");
      const auto& sentences = entry.at("sentences");
      if (timestamps.size() != sentences.size())
        throw SchemaError("timestamps and sentences disagree in length");
      for (std::size_t k = 0; k < timestamps.size(); ++k) {
        DatasetRecord rec;
        rec.qid = video_id + "#" + std::to_string(k);
        rec.video_id = video_id;
        rec.duration = duration;
        rec.query = sentences[k].get<std::string>();
        const auto& ts = timestamps[k];
        if (!ts.is_array() || ts.size() != 2) throw SchemaError("timestamps entries need 2 values");
        rec.windows =
            clip_windows(rec.qid, {{ts[0].get<double>(), ts[1].get<double>()}}, duration, options);
        if (rec.windows.empty()) {
          warn("qid " + rec.qid + ": no usable window, record dropped");
          continue;
        }
        records.push_back(std::move(rec));
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + " video " + video_id + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path + " video " + video_id + ": " + e.what());
    }
  }
  return records;
}

std::vector<MomentGroundTruth> records_to_ground_truth(const std::vector<DatasetRecord>& records) {
  std::vector<MomentGroundTruth> out;
  out.reserve(records.size());
  for (const auto& rec : records)
    out.push_back(MomentGroundTruth{rec.qid, rec.windows, rec.duration});
  return out;
}

std::vector<SaliencyGroundTruth> records_to_saliency(const std::vector<DatasetRecord>& records,
                                                     double clip_seconds) {
  if (clip_seconds <= 0.0) throw SchemaError("clip_seconds must be positive");
  std::vector<SaliencyGroundTruth> out;
  for (const auto& rec : records) {
    if (rec.relevant_clip_ids.empty()) continue;
    auto n_clips = static_cast<std::size_t>(std::ceil(rec.duration / clip_seconds));
    SaliencyGroundTruth gt;
    gt.qid = rec.qid;
    gt.clip_annotations.resize(n_clips);
    for (std::size_t i = 0; i < rec.relevant_clip_ids.size(); ++i) {
      int clip = rec.relevant_clip_ids[i];
      if (clip < 0 || static_cast<std::size_t>(clip) >= n_clips) {
        warn("qid " + rec.qid + ": clip id " + std::to_string(clip) + " outside [0, " +
             std::to_string(n_clips) + "), skipped");
        continue;
      }
      gt.clip_annotations[static_cast<std::size_t>(clip)] = rec.saliency_scores[i];
    }
    out.push_back(std::move(gt));
  }
  return out;
}

void write_predictions_jsonl(const std::string& path, const std::vector<DatasetRecord>& records,
                             const PredictionMap& preds,
                             const SaliencyPredictionMap& saliency) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) {
    nlohmann::json row;
    if (rec.qid_is_int)
      row["qid"] = std::stoll(rec.qid);
    else
      row["qid"] = rec.qid;
    row["pred_relevant_windows"] = nlohmann::json::array();
    if (auto it = preds.find(rec.qid); it != preds.end())
      for (const auto& p : it->second)
        row["pred_relevant_windows"].push_back({p.segment.start, p.segment.end, p.score});
    if (auto it = saliency.find(rec.qid); it != saliency.end())
      row["pred_saliency_scores"] = it->second;
    rows.push_back(std::move(row));
  }
  atomic_write_file(path, to_jsonl(rows));
}

void read_predictions_jsonl(const std::string& path, PredictionMap& preds,
                            SaliencyPredictionMap& saliency) {
  std::size_t line_no = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line_no;
    try {
      std::string qid = j.at("qid").is_number_integer()
                            ? std::to_string(j["qid"].get<long long>())
                            : j.at("qid").get<std::string>();
      auto& list = preds[qid];
      for (const auto& w : j.at("pred_relevant_windows")) {
        if (!w.is_array() || w.size() < 3)
          throw SchemaError("pred_relevant_windows entries need [start, end, score]");
        list.push_back(
            Prediction{TimeSegment(w[0].get<double>(), w[1].get<double>()), w[2].get<double>()});
      }
      if (j.contains("pred_saliency_scores"))
        saliency[qid] = j["pred_saliency_scores"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + " record " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument&) {
      throw SchemaError(path + " record " + std::to_string(line_no) + ": bad qid");
    }
  }
}

}  // namespace groundline
