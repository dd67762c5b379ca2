#include "groundline/errors.hpp"
#include "groundline/eval.hpp"
#include "groundline/hashing.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace groundline;

namespace {

// Independent AP reference: explicit rank list plus a shrinking set of
// unmatched windows, one pass per query per threshold.
double ref_query_ap(std::vector<Prediction> preds, const std::vector<TimeSegment>& windows,
                    double threshold, bool strict) {
  if (windows.empty()) return 0.0;
  std::stable_sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.segment.start != b.segment.start) return a.segment.start < b.segment.start;
    return a.segment.end < b.segment.end;
  });
  std::set<std::size_t> unmatched;
  for (std::size_t g = 0; g < windows.size(); ++g) unmatched.insert(g);
  std::size_t tp = 0;
  double ap = 0.0;
  for (std::size_t r = 0; r < preds.size(); ++r) {
    double best_v = -1.0;
    std::size_t best_g = windows.size();
    for (std::size_t g : unmatched) {
      const double v = iou(preds[r].segment, windows[g]);
      if (v > best_v) {
        best_v = v;
        best_g = g;
      }
    }
    const bool pass = strict ? best_v > threshold : best_v >= threshold;
    if (best_g < windows.size() && pass) {
      unmatched.erase(best_g);
      ++tp;
      ap += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
  }
  return ap / static_cast<double>(windows.size());
}

MomentGroundTruth gt_of(const std::string& qid, std::vector<TimeSegment> windows,
                        double duration = 100.0) {
  return MomentGroundTruth{qid, std::move(windows), duration};
}

std::string table_line(const std::string& table, const std::string& label) {
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(label, 0) == 0) return line;
  return "";
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("default options carry the standard grids") {
    EvalOptions options;
    REQUIRE(options.iou_grid.size() == 10);
    CHECK(options.iou_grid.front() == doctest::Approx(0.5));
    CHECK(options.iou_grid.back() == doctest::Approx(0.95));
    for (std::size_t i = 1; i < options.iou_grid.size(); ++i)
      CHECK(options.iou_grid[i] - options.iou_grid[i - 1] == doctest::Approx(0.05));
    CHECK(options.r1_thresholds == std::vector<double>{0.3, 0.5, 0.7});
    CHECK_FALSE(options.strict_iou);
    REQUIRE(options.vg_predicate);
    CHECK(options.vg_predicate({2, 4}));
    CHECK_FALSE(options.vg_predicate({3, 3}));
  }

  TEST_CASE("recall1 reaches the bar inclusively") {
    // IoU([0,10], [4,12]) = 6/12 = 0.5 exactly.
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(4.0, 12.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};
    CHECK(recall1(preds, gts, 0.5) == doctest::Approx(100.0));
    CHECK(recall1(preds, gts, 0.5, /*strict=*/true) == doctest::Approx(0.0));
    CHECK(recall1(preds, gts, 0.7) == doctest::Approx(0.0));
    CHECK(recall1(preds, gts, 0.3) == doctest::Approx(100.0));
  }

  TEST_CASE("recall1 judges only the top-ranked prediction") {
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(0.0, 10.0)})};
    PredictionMap preds{{"q1",
                         {{TimeSegment(50.0, 60.0), 0.9},     // top, misses
                          {TimeSegment(0.0, 10.0), 0.1}}}};  // perfect but ranked lower
    CHECK(recall1(preds, gts, 0.5) == doctest::Approx(0.0));

    // Equal scores: the earlier-starting prediction ranks first.
    PredictionMap tied{{"q1",
                        {{TimeSegment(50.0, 60.0), 0.5},
                         {TimeSegment(0.0, 10.0), 0.5}}}};
    CHECK(recall1(tied, gts, 0.5) == doctest::Approx(100.0));
  }

  TEST_CASE("queries without predictions count as misses") {
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(0.0, 10.0)}),
                                       gt_of("q2", {TimeSegment(0.0, 10.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};
    CHECK(recall1(preds, gts, 0.5) == doctest::Approx(50.0));
    CHECK(mean_iou(preds, gts) == doctest::Approx(0.5));
    auto det = detection_map(preds, gts, {0.5});
    CHECK(det.map_at[0.5] == doctest::Approx(0.5));
  }

  TEST_CASE("multiple windows score against the best one") {
    std::vector<MomentGroundTruth> gts{
        gt_of("q1", {TimeSegment(80.0, 90.0), TimeSegment(0.0, 10.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};
    CHECK(recall1(preds, gts, 0.9) == doctest::Approx(100.0));
    CHECK(mean_iou(preds, gts) == doctest::Approx(1.0));
  }

  TEST_CASE("detection AP hand values") {
    const std::vector<double> grid{0.5};
    std::vector<MomentGroundTruth> one_gt{gt_of("q1", {TimeSegment(10.0, 20.0)})};

    // Perfect hit at rank 1.
    PredictionMap rank1{{"q1", {{TimeSegment(10.0, 20.0), 0.9}}}};
    CHECK(detection_map(rank1, one_gt, grid).map_at.at(0.5) == doctest::Approx(1.0));

    // Miss at rank 1, hit at rank 2: AP = 1/2.
    PredictionMap rank2{{"q1",
                         {{TimeSegment(50.0, 60.0), 0.9},
                          {TimeSegment(10.0, 20.0), 0.8}}}};
    CHECK(detection_map(rank2, one_gt, grid).map_at.at(0.5) == doctest::Approx(0.5));

    // Two windows, hits at ranks 1 and 3: AP = (1/1 + 2/3) / 2 = 5/6.
    std::vector<MomentGroundTruth> two_gt{
        gt_of("q1", {TimeSegment(10.0, 20.0), TimeSegment(40.0, 50.0)})};
    PredictionMap r13{{"q1",
                       {{TimeSegment(10.0, 20.0), 0.9},
                        {TimeSegment(70.0, 80.0), 0.8},
                        {TimeSegment(40.0, 50.0), 0.7}}}};
    CHECK(detection_map(r13, two_gt, grid).map_at.at(0.5) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));

    // One-to-one matching: a window can only be claimed once.
    PredictionMap duplicated{{"q1",
                              {{TimeSegment(10.0, 20.0), 0.9},
                               {TimeSegment(10.0, 20.0), 0.8}}}};
    CHECK(detection_map(duplicated, one_gt, grid).map_at.at(0.5) == doctest::Approx(1.0));

    // Macro average across queries.
    std::vector<MomentGroundTruth> both{gt_of("q1", {TimeSegment(10.0, 20.0)}),
                                        gt_of("q2", {TimeSegment(10.0, 20.0)})};
    PredictionMap half{{"q1", {{TimeSegment(10.0, 20.0), 0.9}}},
                       {"q2", {{TimeSegment(60.0, 70.0), 0.9}}}};
    CHECK(detection_map(half, both, grid).map_at.at(0.5) == doctest::Approx(0.5));
  }

  TEST_CASE("map_avg is the mean over the grid") {
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(4.0, 12.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};  // IoU 0.5
    auto det = detection_map(preds, gts, {0.3, 0.5, 0.7});
    CHECK(det.map_at.at(0.3) == doctest::Approx(1.0));
    CHECK(det.map_at.at(0.5) == doctest::Approx(1.0));  // inclusive
    CHECK(det.map_at.at(0.7) == doctest::Approx(0.0));
    CHECK(det.map_avg == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("detection_map matches the reference on seeded instances") {
    std::uint64_t state = 808;
    const std::vector<double> grid{0.3, 0.5, 0.7, 0.9};
    for (int round = 0; round < 200; ++round) {
      const std::size_t n_gt = 1 + splitmix64(state) % 5;
      std::vector<TimeSegment> windows;
      for (std::size_t g = 0; g < n_gt; ++g) {
        const double start = 50.0 * (0.5 + 0.5 * unit_double(state));
        windows.push_back(TimeSegment(start, start + 1.0 + 20.0 * (0.5 + 0.5 * unit_double(state))));
      }
      const std::size_t n_pred = splitmix64(state) % 11;
      std::vector<Prediction> preds;
      for (std::size_t p = 0; p < n_pred; ++p) {
        const double start = 60.0 * (0.5 + 0.5 * unit_double(state));
        // quantized scores force rank ties
        const double score = std::round((0.5 + 0.5 * unit_double(state)) * 4.0) / 4.0;
        preds.push_back({TimeSegment(start, start + 1.0 + 25.0 * (0.5 + 0.5 * unit_double(state))),
                         score});
      }
      std::vector<MomentGroundTruth> gts{gt_of("q", windows)};
      PredictionMap pm{{"q", preds}};
      const bool strict = round % 5 == 0;
      auto det = detection_map(pm, gts, grid, strict);
      for (double m : grid) {
        const double want = preds.empty() ? 0.0 : ref_query_ap(preds, windows, m, strict);
        CHECK(det.map_at.at(m) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("empty inputs are length errors") {
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(0.0, 10.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};
    CHECK_THROWS_AS(recall1(preds, {}, 0.5), LengthMismatch);
    CHECK_THROWS_AS(detection_map(preds, {}, {0.5}), LengthMismatch);
    CHECK_THROWS_AS(detection_map(preds, gts, {}), LengthMismatch);
    CHECK_THROWS_AS(mean_iou(preds, {}), LengthMismatch);
  }

  TEST_CASE("highlight metrics follow the clip ranking") {
    // Positives {0, 2}; predicted order [2, 1, 0, 3]: AP = (1/1 + 2/3)/2 = 5/6.
    SaliencyGroundTruth gt;
    gt.qid = "q1";
    gt.clip_annotations = {{4}, {1}, {2, 4}, {0}};
    SaliencyPredictionMap preds{{"q1", {0.1, 0.5, 0.9, 0.05}}};
    auto hd = hd_metrics(preds, {gt}, default_vg_predicate());
    CHECK(hd.hd_map == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(hd.hd_hit1 == doctest::Approx(100.0));  // top clip (2) is positive
    CHECK(hd.n_scored == 1);
    CHECK(hd.n_excluded == 0);
  }

  TEST_CASE("hit@1 fails when the argmax clip is negative") {
    SaliencyGroundTruth gt;
    gt.qid = "q1";
    gt.clip_annotations = {{1}, {4}, {0}};
    SaliencyPredictionMap preds{{"q1", {0.9, 0.2, 0.1}}};
    auto hd = hd_metrics(preds, {gt}, default_vg_predicate());
    CHECK(hd.hd_hit1 == doctest::Approx(0.0));
    CHECK(hd.hd_map == doctest::Approx(0.5));  // positive found at rank 2
  }

  TEST_CASE("tied saliency scores rank the earlier clip first") {
    SaliencyGroundTruth gt;
    gt.qid = "q1";
    gt.clip_annotations = {{0}, {0}, {0}, {4}};
    SaliencyPredictionMap preds{{"q1", {0.5, 0.5, 0.5, 0.5}}};
    auto hd = hd_metrics(preds, {gt}, default_vg_predicate());
    CHECK(hd.hd_map == doctest::Approx(0.25));  // the positive lands at rank 4
    CHECK(hd.hd_hit1 == doctest::Approx(0.0));
  }

  TEST_CASE("queries with no positive clip are excluded, not scored") {
    SaliencyGroundTruth scored;
    scored.qid = "q1";
    scored.clip_annotations = {{4}, {0}};
    SaliencyGroundTruth empty;
    empty.qid = "q2";
    empty.clip_annotations = {{1, 2}, {3}, {}};
    SaliencyPredictionMap preds{{"q1", {0.9, 0.1}}, {"q2", {0.1, 0.2, 0.3}}};
    auto hd = hd_metrics(preds, {scored, empty}, default_vg_predicate());
    CHECK(hd.n_scored == 1);
    CHECK(hd.n_excluded == 1);
    CHECK(hd.hd_map == doctest::Approx(1.0));
    CHECK(hd.hd_hit1 == doctest::Approx(100.0));

    CHECK_THROWS_AS(hd_metrics(preds, {empty}, default_vg_predicate()), LengthMismatch);
  }

  TEST_CASE("the positive-clip rule is injectable") {
    SaliencyGroundTruth gt;
    gt.qid = "q1";
    gt.clip_annotations = {{3, 3}, {4}, {1}};
    SaliencyPredictionMap preds{{"q1", {0.9, 0.5, 0.1}}};

    auto strict = hd_metrics(preds, {gt}, default_vg_predicate());
    CHECK(strict.hd_hit1 == doctest::Approx(0.0));  // only clip 1 counts

    auto lenient = hd_metrics(preds, {gt}, [](const std::vector<int>& scores) {
      double sum = 0.0;
      for (int s : scores) sum += s;
      return sum / static_cast<double>(scores.size()) >= 3.0;
    });
    CHECK(lenient.hd_hit1 == doctest::Approx(100.0));  // clip 0 now positive
  }

  TEST_CASE("saliency shape problems are length errors") {
    SaliencyGroundTruth gt;
    gt.qid = "q1";
    gt.clip_annotations = {{4}, {0}};
    SaliencyPredictionMap missing;
    CHECK_THROWS_AS(hd_metrics(missing, {gt}, default_vg_predicate()), LengthMismatch);
    SaliencyPredictionMap short_row{{"q1", {0.9}}};
    CHECK_THROWS_AS(hd_metrics(short_row, {gt}, default_vg_predicate()), LengthMismatch);
  }

  TEST_CASE("evaluate assembles the full report") {
    std::vector<MomentGroundTruth> gts{gt_of("q1", {TimeSegment(4.0, 12.0)})};
    PredictionMap preds{{"q1", {{TimeSegment(0.0, 10.0), 0.9}}}};
    SaliencyGroundTruth sgt;
    sgt.qid = "q1";
    sgt.clip_annotations = {{4}, {0}};
    SaliencyPredictionMap sal{{"q1", {0.9, 0.1}}};

    auto report = evaluate(preds, gts, sal, {sgt}, EvalOptions{});
    CHECK(report.n_queries == 1);
    CHECK(report.r1_at.at(0.5) == doctest::Approx(100.0));
    CHECK(report.r1_at.at(0.7) == doctest::Approx(0.0));
    CHECK(report.map_at.size() == 10);
    CHECK(report.miou == doctest::Approx(0.5));
    REQUIRE(report.hd_map.has_value());
    CHECK(*report.hd_map == doctest::Approx(1.0));
    CHECK(*report.hd_hit1 == doctest::Approx(100.0));

    // No saliency ground truth: the HD block stays absent.
    auto moments_only = evaluate(preds, gts, {}, {}, EvalOptions{});
    CHECK_FALSE(moments_only.hd_map.has_value());
    CHECK_FALSE(moments_only.hd_hit1.has_value());
  }

  TEST_CASE("report json uses stable keys and units") {
    MetricReport report;
    report.r1_at = {{0.5, 62.5}, {0.7, 41.25}};
    report.map_at = {{0.5, 0.5}, {0.55, 0.25}, {0.75, 0.125}};
    report.map_avg = 0.375;
    report.miou = 0.625;
    report.hd_map = 0.5;
    report.hd_hit1 = 75.0;
    report.n_queries = 40;
    auto doc = nlohmann::json::parse(report_json(report));
    CHECK(doc["r1"]["0.5"] == doctest::Approx(62.5));
    CHECK(doc["r1"]["0.7"] == doctest::Approx(41.25));
    CHECK(doc["map"]["0.5"] == doctest::Approx(0.5));
    CHECK(doc["map"]["0.55"] == doctest::Approx(0.25));  // two decimals only when needed
    CHECK(doc["map"]["0.75"] == doctest::Approx(0.125));
    CHECK(doc["map_avg"] == doctest::Approx(0.375));
    CHECK(doc["miou"] == doctest::Approx(0.625));
    CHECK(doc["hd_map"] == doctest::Approx(0.5));
    CHECK(doc["hd_hit1"] == doctest::Approx(75.0));
    CHECK(doc["n_queries"] == 40);

    MetricReport bare;
    bare.r1_at = {{0.5, 0.0}};
    bare.map_at = {{0.5, 0.0}};
    auto no_hd = nlohmann::json::parse(report_json(bare));
    CHECK_FALSE(no_hd.contains("hd_map"));
    CHECK_FALSE(no_hd.contains("hd_hit1"));
  }

  TEST_CASE("report table shows fractional metrics x100") {
    MetricReport report;
    report.r1_at = {{0.5, 62.5}};
    report.map_at = {{0.5, 0.5}};
    report.map_avg = 0.5;
    report.miou = 0.625;
    report.hd_map = 0.25;
    report.hd_hit1 = 75.0;
    report.n_queries = 8;
    const auto table = report_table(report);
    CHECK(table_line(table, "R1@0.5").find("62.50") != std::string::npos);
    CHECK(table_line(table, "mAP@0.5").find("50.00") != std::string::npos);
    CHECK(table_line(table, "mAP avg").find("50.00") != std::string::npos);
    CHECK(table_line(table, "mIoU").find("62.50") != std::string::npos);
    CHECK(table_line(table, "HD mAP").find("25.00") != std::string::npos);
    CHECK(table_line(table, "HD HIT@1").find("75.00") != std::string::npos);
    CHECK(table_line(table, "queries").find("8") != std::string::npos);
  }
}
