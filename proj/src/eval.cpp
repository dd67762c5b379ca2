#include "groundline/eval.hpp"

#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace groundline {

namespace {

bool iou_passes(double iou, double threshold, bool strict) {
  return strict ? iou > threshold : iou >= threshold;
}

// Highest IoU against any ground-truth window of the query.
double best_iou(const TimeSegment& pred, const std::vector<TimeSegment>& gt_windows) {
  double best = 0.0;
  for (const auto& w : gt_windows) best = std::max(best, iou(pred, w));
  return best;
}

std::vector<Prediction> ranked(std::vector<Prediction> preds) {
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.end < b.segment.end;
  });
  return preds;
}

// Average precision of one query's ranked predictions against its windows:
// walk the ranking, greedily match each prediction to its best still-unmatched
// window (ties -> lowest window index), and accumulate precision at the ranks
// that produce a match.
double query_ap(const std::vector<Prediction>& ranked_preds,
                const std::vector<TimeSegment>& gt_windows, double threshold, bool strict) {
  if (gt_windows.empty()) return 0.0;
  std::vector<bool> matched(gt_windows.size(), false);
  std::size_t tp = 0;
  double ap_sum = 0.0;
  for (std::size_t r = 0; r < ranked_preds.size(); ++r) {
    double best = -1.0;
    std::size_t best_idx = gt_windows.size();
    for (std::size_t g = 0; g < gt_windows.size(); ++g) {
      if (matched[g]) continue;
      double v = iou(ranked_preds[r].segment, gt_windows[g]);
      if (v > best) {
        best = v;
        best_idx = g;
      }
    }
    if (best_idx < gt_windows.size() && iou_passes(best, threshold, strict)) {
      matched[best_idx] = true;
      ++tp;
      ap_sum += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
  }
  return ap_sum / static_cast<double>(gt_windows.size());
}

const std::vector<Prediction>* find_preds(const PredictionMap& preds, const std::string& qid) {
  auto it = preds.find(qid);
  if (it == preds.end() || it->second.empty()) return nullptr;
  return &it->second;
}

std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  std::string s(buf);
  while (s.size() > 3 && s.back() == '0') s.pop_back();
  return s;
}

}  // namespace

VgPredicate default_vg_predicate() {
  return [](const std::vector<int>& scores) {
    return std::any_of(scores.begin(), scores.end(), [](int s) { return s >= 4; });
  };
}

EvalOptions::EvalOptions() {
  for (int i = 0; i <= 9; ++i) iou_grid.push_back((50 + 5 * i) / 100.0);
  r1_thresholds = {0.3, 0.5, 0.7};
  vg_predicate = default_vg_predicate();
}

double recall1(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts,
               double threshold, bool strict_iou) {
  if (gts.empty()) throw LengthMismatch("recall1: no ground truth");
  std::size_t hits = 0;
  std::size_t missing = 0;
  for (const auto& gt : gts) {
    const auto* p = find_preds(preds, gt.qid);
    if (p == nullptr) {
      ++missing;
      continue;
    }
    auto top = ranked(*p).front();
    if (iou_passes(best_iou(top.segment, gt.segments), threshold, strict_iou)) ++hits;
  }
  if (missing > 0)
    warn(std::to_string(missing) + " of " + std::to_string(gts.size()) +
         " queries have no prediction; counted as misses");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(gts.size());
}

DetectionMapResult detection_map(const PredictionMap& preds,
                                 const std::vector<MomentGroundTruth>& gts,
                                 const std::vector<double>& grid, bool strict_iou) {
  if (gts.empty()) throw LengthMismatch("detection_map: no ground truth");
  if (grid.empty()) throw LengthMismatch("detection_map: empty IoU grid");
  DetectionMapResult result;
  for (double m : grid) {
    double sum = 0.0;
    for (const auto& gt : gts) {
      const auto* p = find_preds(preds, gt.qid);
      if (p == nullptr) continue;  // AP 0 for the query
      sum += query_ap(ranked(*p), gt.segments, m, strict_iou);
    }
    result.map_at[m] = sum / static_cast<double>(gts.size());
  }
  double total = 0.0;
  for (const auto& [m, v] : result.map_at) total += v;
  result.map_avg = total / static_cast<double>(result.map_at.size());
  return result;
}

double mean_iou(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts) {
  if (gts.empty()) throw LengthMismatch("mean_iou: no ground truth");
  double sum = 0.0;
  for (const auto& gt : gts) {
    const auto* p = find_preds(preds, gt.qid);
    if (p == nullptr) continue;
    sum += best_iou(ranked(*p).front().segment, gt.segments);
  }
  return sum / static_cast<double>(gts.size());
}

HdResult hd_metrics(const SaliencyPredictionMap& pred_saliency,
                    const std::vector<SaliencyGroundTruth>& gts, const VgPredicate& vg) {
  HdResult out;
  double ap_sum = 0.0;
  double hit_sum = 0.0;
  for (const auto& gt : gts) {
    std::vector<bool> positive(gt.clip_annotations.size(), false);
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < gt.clip_annotations.size(); ++i) {
      if (!gt.clip_annotations[i].empty() && vg(gt.clip_annotations[i])) {
        positive[i] = true;
        ++n_pos;
      }
    }
    if (n_pos == 0) {
      ++out.n_excluded;  // no positive clip: the query cannot be scored
      continue;
    }
    auto it = pred_saliency.find(gt.qid);
    if (it == pred_saliency.end())
      throw LengthMismatch("hd_metrics: no saliency prediction for qid " + gt.qid);
    const auto& scores = it->second;
    if (scores.size() != positive.size())
      throw LengthMismatch("hd_metrics: qid " + gt.qid + " has " + std::to_string(scores.size()) +
                           " scores for " + std::to_string(positive.size()) + " clips");

    // Rank clips by predicted score, ties resolved toward the earlier clip.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });

    std::size_t tp = 0;
    double ap = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (positive[order[r]]) {
        ++tp;
        ap += static_cast<double>(tp) / static_cast<double>(r + 1);
      }
    }
    ap_sum += ap / static_cast<double>(n_pos);
    hit_sum += positive[order.front()] ? 1.0 : 0.0;
    ++out.n_scored;
  }
  if (out.n_scored == 0) throw LengthMismatch("hd_metrics: no scorable query");
  out.hd_map = ap_sum / static_cast<double>(out.n_scored);
  out.hd_hit1 = 100.0 * hit_sum / static_cast<double>(out.n_scored);
  return out;
}

MetricReport evaluate(const PredictionMap& preds, const std::vector<MomentGroundTruth>& gts,
                      const SaliencyPredictionMap& pred_saliency,
                      const std::vector<SaliencyGroundTruth>& saliency_gts,
                      const EvalOptions& options) {
  MetricReport report;
  report.n_queries = gts.size();
  for (double t : options.r1_thresholds)
    report.r1_at[t] = recall1(preds, gts, t, options.strict_iou);
  auto det = detection_map(preds, gts, options.iou_grid, options.strict_iou);
  report.map_at = det.map_at;
  report.map_avg = det.map_avg;
  report.miou = mean_iou(preds, gts);
  if (!saliency_gts.empty()) {
    auto hd = hd_metrics(pred_saliency, saliency_gts, options.vg_predicate);
    report.hd_map = hd.hd_map;
    report.hd_hit1 = hd.hd_hit1;
  }
  return report;
}

std::string report_table(const MetricReport& report) {
  std::ostringstream os;
  char buf[64];
  os << "metric            value\n";
  os << "----------------  ------\n";
  for (const auto& [t, v] : report.r1_at) {
    std::snprintf(buf, sizeof(buf), "R1@%-4s           %6.2f\n", format_threshold(t).c_str(), v);
    os << buf;
  }
  for (const auto& [t, v] : report.map_at) {
    std::snprintf(buf, sizeof(buf), "mAP@%-4s          %6.2f\n", format_threshold(t).c_str(),
                  100.0 * v);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "mAP avg           %6.2f\n", 100.0 * report.map_avg);
  os << buf;
  std::snprintf(buf, sizeof(buf), "mIoU              %6.2f\n", 100.0 * report.miou);
  os << buf;
  if (report.hd_map) {
    std::snprintf(buf, sizeof(buf), "HD mAP            %6.2f\n", 100.0 * *report.hd_map);
    os << buf;
    std::snprintf(buf, sizeof(buf), "HD HIT@1          %6.2f\n", *report.hd_hit1);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "queries           %6zu\n", report.n_queries);
  os << buf;
  return os.str();
}

std::string report_json(const MetricReport& report) {
  nlohmann::json j;
  for (const auto& [t, v] : report.r1_at) j["r1"][format_threshold(t)] = v;
  for (const auto& [t, v] : report.map_at) j["map"][format_threshold(t)] = v;
  j["map_avg"] = report.map_avg;
  j["miou"] = report.miou;
  if (report.hd_map) {
    j["hd_map"] = *report.hd_map;
    j["hd_hit1"] = *report.hd_hit1;
  }
  j["n_queries"] = report.n_queries;
  return j.dump(2);
}

}  // namespace groundline
