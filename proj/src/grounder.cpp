#include "groundline/grounder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace groundline {

void GeneratorConfig::validate() const {
  if (n_bins < 1) throw std::invalid_argument("GeneratorConfig: n_bins must be >= 1");
  if (top_k < 1) throw std::invalid_argument("GeneratorConfig: top_k must be >= 1");
}

const char* sim_aggregate_name(SimAggregate mode) {
  switch (mode) {
    case SimAggregate::relevant_mean: return "relevant_mean";
    case SimAggregate::extent_mean: return "extent_mean";
    case SimAggregate::max_value: return "max";
  }
  throw std::invalid_argument("unknown SimAggregate");
}

SimAggregate sim_aggregate_from(const std::string& name) {
  if (name == "relevant_mean") return SimAggregate::relevant_mean;
  if (name == "extent_mean") return SimAggregate::extent_mean;
  if (name == "max") return SimAggregate::max_value;
  throw std::invalid_argument("sim_mode must be relevant_mean, extent_mean or max, got: " + name);
}

void ScorerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ScorerConfig: alpha outside [0, 1]");
}

void NmsConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw std::invalid_argument("NmsConfig: iou_threshold outside (0, 1]");
}

double dynamic_threshold(std::span<const double> row, const GeneratorConfig& config) {
  config.validate();
  if (row.empty()) throw std::invalid_argument("dynamic_threshold: empty row");

  const auto [min_it, max_it] = std::minmax_element(row.begin(), row.end());
  const double lo = *min_it, hi = *max_it;
  if (lo == hi) return lo;

  const std::size_t k = std::min(config.top_k, row.size());
  std::vector<double> sorted(row.begin(), row.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end(), std::greater<>());
  const double kth_largest = sorted[k - 1];

  // Division gives the bin hint; the edge comparisons are authoritative so
  // boundary values land exactly where an explicit edge scan puts them.
  const double width = (hi - lo) / static_cast<double>(config.n_bins);
  auto edge = [&](std::size_t i) { return lo + static_cast<double>(i) * width; };
  std::size_t bin = static_cast<std::size_t>(
      std::clamp(std::floor((kth_largest - lo) / width), 0.0,
                 static_cast<double>(config.n_bins - 1)));
  while (bin > 0 && kth_largest < edge(bin)) --bin;
  while (bin + 1 < config.n_bins && kth_largest >= edge(bin + 1)) ++bin;
  return edge(bin);
}

std::vector<Proposal> scan_proposals(std::span<const double> row, double theta,
                                     std::size_t gap_lambda, std::size_t query_index,
                                     double fps) {
  if (!std::isfinite(theta)) throw std::invalid_argument("scan_proposals: non-finite theta");
  std::vector<Proposal> out;
  bool open = false;
  std::size_t start = 0, last_relevant = 0, gap = 0;

  auto close = [&] {
    Proposal p;
    p.query_index = query_index;
    p.start_frame = start;
    p.end_frame = last_relevant;
    p.segment = TimeSegment(static_cast<double>(start) / fps,
                            static_cast<double>(last_relevant + 1) / fps);
    out.push_back(p);
    open = false;
  };

  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] >= theta) {
      if (!open) {
        open = true;
        start = j;
      }
      last_relevant = j;
      gap = 0;
    } else if (open) {
      // Strictly more than lambda consecutive misses sever the proposal.
      if (++gap > gap_lambda) close();
    }
  }
  if (open) close();
  return out;
}

ScoredProposal score_proposal(const Proposal& p, std::span<const double> row, double theta,
                              const ScorerConfig& config) {
  config.validate();
  if (p.end_frame >= row.size() || p.start_frame > p.end_frame)
    throw std::invalid_argument("score_proposal: proposal outside row");

  std::size_t in_proposal = 0;   // L_p
  std::size_t in_video = 0;      // L_n
  double relevant_sum = 0.0;
  double relevant_max = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] < theta) continue;
    ++in_video;
    if (j >= p.start_frame && j <= p.end_frame) {
      ++in_proposal;
      relevant_sum += row[j];
      relevant_max = std::max(relevant_max, row[j]);
    }
  }
  if (in_proposal == 0)
    throw std::invalid_argument("score_proposal: proposal holds no relevant frame");

  ScoredProposal scored;
  scored.proposal = p;
  scored.s_length = static_cast<double>(in_proposal) / static_cast<double>(in_video);
  switch (config.sim_aggregate) {
    case SimAggregate::relevant_mean:
      scored.s_similarity = relevant_sum / static_cast<double>(in_proposal);
      break;
    case SimAggregate::extent_mean: {
      double sum = 0.0;
      for (std::size_t j = p.start_frame; j <= p.end_frame; ++j) sum += row[j];
      scored.s_similarity = sum / static_cast<double>(p.end_frame - p.start_frame + 1);
      break;
    }
    case SimAggregate::max_value:
      scored.s_similarity = relevant_max;
      break;
  }
  scored.s_fused = config.alpha * scored.s_length + (1.0 - config.alpha) * scored.s_similarity;
  return scored;
}

namespace {

bool nms_before(const ScoredProposal& a, const ScoredProposal& b) {
  if (a.s_fused != b.s_fused) return a.s_fused > b.s_fused;
  if (a.proposal.segment.start != b.proposal.segment.start)
    return a.proposal.segment.start < b.proposal.segment.start;
  if (a.proposal.segment.length() != b.proposal.segment.length())
    return a.proposal.segment.length() < b.proposal.segment.length();
  return a.proposal.query_index < b.proposal.query_index;
}

}  // namespace

std::vector<ScoredProposal> nms(std::vector<ScoredProposal> proposals, const NmsConfig& config) {
  config.validate();
  std::sort(proposals.begin(), proposals.end(), nms_before);
  std::vector<ScoredProposal> kept;
  std::vector<bool> suppressed(proposals.size(), false);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(proposals[i]);
    for (std::size_t j = i + 1; j < proposals.size(); ++j) {
      if (suppressed[j]) continue;
      if (iou(proposals[i].proposal.segment, proposals[j].proposal.segment) >
          config.iou_threshold)
        suppressed[j] = true;
    }
  }
  return kept;
}

std::vector<RankedSegment> ground(const SimilarityMatrix& matrix, const GeneratorConfig& gen,
                                  const ScorerConfig& scorer, const NmsConfig& nms_config) {
  std::vector<ScoredProposal> pooled;
  for (std::size_t i = 0; i < matrix.n_q; ++i) {
    const std::span<const double> row(matrix.row(i), matrix.n_v);
    const double theta = dynamic_threshold(row, gen);
    for (const auto& p : scan_proposals(row, theta, gen.gap_lambda, i, matrix.timeline.fps))
      pooled.push_back(score_proposal(p, row, theta, scorer));
  }
  const auto kept = nms(std::move(pooled), nms_config);
  std::vector<RankedSegment> out;
  out.reserve(kept.size());
  for (const auto& sp : kept) out.push_back(RankedSegment{sp.proposal.segment, sp.s_fused});
  return out;
}

std::vector<double> saliency(const SimilarityMatrix& matrix) {
  std::vector<double> out(matrix.n_v, 0.0);
  for (std::size_t i = 0; i < matrix.n_q; ++i)
    for (std::size_t j = 0; j < matrix.n_v; ++j) out[j] += matrix.at(i, j);
  for (double& v : out) v /= static_cast<double>(matrix.n_q);
  return out;
}

}  // namespace groundline
