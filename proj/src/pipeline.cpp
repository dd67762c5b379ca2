#include "groundline/pipeline.hpp"

#include "groundline/errors.hpp"
#include "groundline/hashing.hpp"
#include "groundline/jsonl.hpp"
#include "groundline/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace groundline {

namespace fs = std::filesystem;

namespace {

void expect_keys(const nlohmann::json& j, const std::set<std::string>& keys,
                 const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (keys.count(key) == 0) throw SchemaError("unknown config key " + where + "." + key);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

}  // namespace

void PipelineConfig::validate() const {
  if (dataset.kind != "qvhighlights" && dataset.kind != "charades_sta" &&
      dataset.kind != "activitynet")
    throw SchemaError("dataset.kind must be qvhighlights, charades_sta or activitynet");
  if (!(dataset.fps > 0.0) || !std::isfinite(dataset.fps))
    throw SchemaError("dataset.fps must be positive");
  if (n_q < 1) throw SchemaError("n_q must be at least 1");
  if (providers.caption_temperature < 0.0 || providers.caption_temperature > 2.0 ||
      providers.debias_temperature < 0.0 || providers.debias_temperature > 2.0)
    throw SchemaError("temperatures must lie in [0, 2]");
  if (providers.embed_dim < 8) throw SchemaError("providers.embed_dim must be at least 8");
  if (providers.max_in_flight < 1) throw SchemaError("providers.max_in_flight must be at least 1");
  generator.validate();
  scorer.validate();
  nms.validate();
}

PipelineConfig default_config(const std::string& dataset_kind) {
  PipelineConfig config;
  config.dataset.kind = dataset_kind;
  if (dataset_kind == "activitynet")
    config.dataset.fps = 1.0 / 3.0;
  else
    config.dataset.fps = 0.5;
  config.validate();
  return config;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["dataset"] = {{"kind", c.dataset.kind},
                  {"annotation_path", c.dataset.annotation_path},
                  {"durations_path", c.dataset.durations_path},
                  {"frames_dir", c.dataset.frames_dir},
                  {"fps", c.dataset.fps}};
  j["providers"] = {{"chat_base_url", c.providers.chat_base_url},
                    {"embed_base_url", c.providers.embed_base_url},
                    {"chat_model", c.providers.chat_model},
                    {"debias_model", c.providers.debias_model},
                    {"embed_model", c.providers.embed_model},
                    {"caption_temperature", c.providers.caption_temperature},
                    {"debias_temperature", c.providers.debias_temperature},
                    {"embed_dim", c.providers.embed_dim},
                    {"max_in_flight", c.providers.max_in_flight}};
  j["n_q"] = c.n_q;
  j["generator"] = {{"n_bins", c.generator.n_bins},
                    {"top_k", c.generator.top_k},
                    {"gap_lambda", c.generator.gap_lambda}};
  j["scorer"] = {{"alpha", c.scorer.alpha},
                 {"sim_mode", sim_aggregate_name(c.scorer.sim_aggregate)}};
  j["nms"] = {{"iou_threshold", c.nms.iou_threshold}};
  j["cache_dir"] = c.cache_dir;
  j["seed"] = c.seed;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  expect_keys(doc,
              {"dataset", "providers", "n_q", "generator", "scorer", "nms", "cache_dir", "seed"},
              "config");
  std::string kind = "qvhighlights";
  if (doc.contains("dataset") && doc["dataset"].contains("kind"))
    kind = doc["dataset"]["kind"].get<std::string>();
  PipelineConfig c = default_config(kind);
  try {
    if (doc.contains("dataset")) {
      const auto& d = doc["dataset"];
      expect_keys(d, {"kind", "annotation_path", "durations_path", "frames_dir", "fps"},
                  "dataset");
      if (d.contains("annotation_path")) c.dataset.annotation_path = d["annotation_path"];
      if (d.contains("durations_path")) c.dataset.durations_path = d["durations_path"];
      if (d.contains("frames_dir")) c.dataset.frames_dir = d["frames_dir"];
      if (d.contains("fps")) c.dataset.fps = d["fps"];
    }
    if (doc.contains("providers")) {
      const auto& p = doc["providers"];
      expect_keys(p,
                  {"chat_base_url", "embed_base_url", "chat_model", "debias_model", "embed_model",
                   "caption_temperature", "debias_temperature", "embed_dim", "max_in_flight"},
                  "providers");
      if (p.contains("chat_base_url")) c.providers.chat_base_url = p["chat_base_url"];
      if (p.contains("embed_base_url")) c.providers.embed_base_url = p["embed_base_url"];
      if (p.contains("chat_model")) c.providers.chat_model = p["chat_model"];
      if (p.contains("debias_model")) c.providers.debias_model = p["debias_model"];
      if (p.contains("embed_model")) c.providers.embed_model = p["embed_model"];
      if (p.contains("caption_temperature"))
        c.providers.caption_temperature = p["caption_temperature"];
      if (p.contains("debias_temperature"))
        c.providers.debias_temperature = p["debias_temperature"];
      if (p.contains("embed_dim")) c.providers.embed_dim = p["embed_dim"];
      if (p.contains("max_in_flight")) c.providers.max_in_flight = p["max_in_flight"];
    }
    if (doc.contains("n_q")) c.n_q = doc["n_q"];
    if (doc.contains("generator")) {
      const auto& g = doc["generator"];
      expect_keys(g, {"n_bins", "top_k", "gap_lambda"}, "generator");
      if (g.contains("n_bins")) c.generator.n_bins = g["n_bins"];
      if (g.contains("top_k")) c.generator.top_k = g["top_k"];
      if (g.contains("gap_lambda")) c.generator.gap_lambda = g["gap_lambda"];
    }
    if (doc.contains("scorer")) {
      const auto& s = doc["scorer"];
      expect_keys(s, {"alpha", "sim_mode"}, "scorer");
      if (s.contains("alpha")) c.scorer.alpha = s["alpha"];
      if (s.contains("sim_mode"))
        c.scorer.sim_aggregate = sim_aggregate_from(s["sim_mode"].get<std::string>());
    }
    if (doc.contains("nms") && doc["nms"].contains("iou_threshold")) {
      expect_keys(doc["nms"], {"iou_threshold"}, "nms");
      c.nms.iou_threshold = doc["nms"]["iou_threshold"];
    }
    if (doc.contains("cache_dir")) c.cache_dir = doc["cache_dir"];
    if (doc.contains("seed")) c.seed = doc["seed"];
    c.validate();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const fs::path& path, const PipelineConfig& config) {
  atomic_write_file(path, config_to_json(config).dump(2) + "\n");
}

void apply_override(nlohmann::json& doc, const std::string& dotted_path,
                    const std::string& value) {
  if (dotted_path.empty()) throw SchemaError("empty override path");
  std::vector<std::string> parts;
  std::istringstream is(dotted_path);
  std::string part;
  while (std::getline(is, part, '.')) {
    if (part.empty()) throw SchemaError("malformed override path " + dotted_path);
    parts.push_back(part);
  }
  nlohmann::json* node = &doc;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw SchemaError("override path " + dotted_path + " crosses a leaf");
    node = &((*node)[parts[i]]);
    if (node->is_null()) *node = nlohmann::json::object();
  }
  auto parsed = nlohmann::json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
}

std::pair<std::string, std::vector<std::string>> parse_sweep(const std::string& sweep_spec) {
  auto eq = sweep_spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw SchemaError("sweep must look like key=v1,v2,... got: " + sweep_spec);
  std::string key = sweep_spec.substr(0, eq);
  std::vector<std::string> values;
  std::istringstream is(sweep_spec.substr(eq + 1));
  std::string v;
  while (std::getline(is, v, ',')) {
    if (!v.empty()) values.push_back(v);
  }
  if (values.empty()) throw SchemaError("sweep " + key + " has no values");
  return {key, values};
}

std::vector<DatasetRecord> load_dataset(const DatasetConfig& dataset) {
  if (dataset.annotation_path.empty())
    throw SchemaError("dataset.annotation_path is not set; point it at the annotation file");
  if (dataset.kind == "qvhighlights") return load_qvhighlights(dataset.annotation_path);
  if (dataset.kind == "charades_sta") {
    if (dataset.durations_path.empty())
      throw SchemaError("charades_sta needs dataset.durations_path (video id -> seconds JSON)");
    return load_charades_sta(dataset.annotation_path, dataset.durations_path);
  }
  if (dataset.kind == "activitynet") return load_activitynet(dataset.annotation_path);
  throw SchemaError("unknown dataset.kind " + dataset.kind);
}

Providers make_providers(const PipelineConfig& config, bool offline) {
  Providers out;
  if (!config.cache_dir.empty()) out.cache = std::make_shared<ResponseCache>(config.cache_dir);
  if (offline) {
    OfflineChatOptions chat_options;
    chat_options.seed = config.seed;
    std::shared_ptr<ChatProvider> chat = make_offline_chat_provider(chat_options);
    out.debias_chat = chat;
    out.caption_chat = chat;
    out.embedder = make_offline_embed_provider(config.providers.embed_dim, config.seed);
  } else {
    std::string chat_base = env_or("GROUNDLINE_CHAT_BASE_URL", config.providers.chat_base_url);
    std::string embed_base = env_or("GROUNDLINE_EMBED_BASE_URL", config.providers.embed_base_url);
    std::string api_key = env_or("GROUNDLINE_API_KEY", "");
    if (chat_base.empty())
      throw ProviderError(
          "no chat endpoint: set providers.chat_base_url or GROUNDLINE_CHAT_BASE_URL, or pass "
          "--offline");
    if (embed_base.empty())
      throw ProviderError(
          "no embeddings endpoint: set providers.embed_base_url or GROUNDLINE_EMBED_BASE_URL, or "
          "pass --offline");
    HttpProviderConfig hc;
    hc.base_url = chat_base;
    hc.api_key = api_key;
    hc.max_in_flight = config.providers.max_in_flight;
    out.debias_chat = make_http_chat_provider(hc);
    out.caption_chat = out.debias_chat;
    HttpProviderConfig ec = hc;
    ec.base_url = embed_base;
    out.embedder = make_http_embed_provider(ec);
  }
  if (out.cache) {
    out.debias_chat = make_cached_chat_provider(Stage::debias, out.debias_chat, out.cache);
    out.caption_chat = make_cached_chat_provider(Stage::caption, out.caption_chat, out.cache);
    out.embedder = make_cached_embed_provider(out.embedder, out.cache);
  }
  return out;
}

void run_debias(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                ChatProvider& chat, const fs::path& out_path) {
  DebiasOptions options;
  options.model_id = config.providers.debias_model;
  options.n_q = config.n_q;
  options.temperature = config.providers.debias_temperature;
  std::vector<DebiasedQuerySet> sets;
  sets.reserve(records.size());
  std::vector<std::string> failures;
  for (const auto& rec : records) {
    try {
      sets.push_back(debias(Query(rec.qid, rec.query), chat, options));
    } catch (const Error& e) {
      failures.push_back(rec.qid + ": " + e.what());
    }
  }
  save_debiased_jsonl(out_path, sets);
  if (!failures.empty()) {
    for (const auto& f : failures) warn("debias " + f);
    throw ProviderError("debias failed for " + std::to_string(failures.size()) + " of " +
                        std::to_string(records.size()) + " queries");
  }
}

namespace {

// One timeline per distinct video, in first-appearance order.
std::vector<std::pair<std::string, double>> unique_videos(
    const std::vector<DatasetRecord>& records) {
  std::vector<std::pair<std::string, double>> videos;
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (seen.insert(rec.video_id).second) {
      videos.emplace_back(rec.video_id, rec.duration);
    }
  }
  return videos;
}

FrameTimeline timeline_for(const std::string& video_id, double duration, const fs::path& frames_dir,
                           double fps) {
  fs::path dir = frames_dir / video_id;
  if (!fs::is_directory(dir))
    throw MissingFrame("no frames for video " + video_id + "; expected files under " +
                       dir.string() + " (extract with: ffmpeg -i VIDEO -vf fps=" +
                       std::to_string(fps) + " -start_number 0 " + dir.string() + "/%06d.jpg)");
  auto files = list_frame_files(dir);
  if (files.empty()) throw MissingFrame("frame directory " + dir.string() + " is empty");
  auto expected = static_cast<std::size_t>(std::llround(duration * fps));
  if (expected > 0 && files.size() != expected)
    warn("video " + video_id + ": " + std::to_string(files.size()) + " frames on disk, expected " +
         std::to_string(expected) + " at " + std::to_string(fps) + " fps");
  return FrameTimeline(video_id, fps, duration, files);
}

}  // namespace

void run_caption(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                 ChatProvider& chat, int jobs, const fs::path& out_dir) {
  if (config.dataset.frames_dir.empty())
    throw SchemaError("dataset.frames_dir is not set; point it at the extracted frames");
  CaptionOptions options;
  options.model_id = config.providers.chat_model;
  options.temperature = config.providers.caption_temperature;
  options.jobs = jobs;
  fs::create_directories(out_dir);
  std::vector<std::string> failures;
  for (const auto& [video_id, duration] : unique_videos(records)) {
    try {
      auto timeline =
          timeline_for(video_id, duration, config.dataset.frames_dir, config.dataset.fps);
      auto track = caption_video(timeline, chat, options);
      save_caption_jsonl(out_dir / (video_id + ".jsonl"), track);
    } catch (const Error& e) {
      failures.push_back(video_id + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) warn("caption " + f);
    throw ProviderError("caption failed for " + std::to_string(failures.size()) + " videos");
  }
}

namespace {

std::map<std::string, DebiasedQuerySet> load_debiased_map(const fs::path& path) {
  if (!fs::exists(path))
    throw ParseError("debiased queries not found at " + path.string() +
                     "; run `groundline debias` first");
  std::map<std::string, DebiasedQuerySet> out;
  for (auto& set : load_debiased_jsonl(path)) out[set.original.query_id] = std::move(set);
  return out;
}

const CaptionTrack& track_for(std::map<std::string, CaptionTrack>& cache,
                              const fs::path& captions_dir, const std::string& video_id,
                              double fps, double duration) {
  auto it = cache.find(video_id);
  if (it != cache.end()) return it->second;
  fs::path p = captions_dir / (video_id + ".jsonl");
  if (!fs::exists(p))
    throw ParseError("captions not found at " + p.string() + "; run `groundline caption` first");
  return cache.emplace(video_id, load_caption_jsonl(p, fps, duration)).first->second;
}

SimilarityMatrix matrix_for_record(const PipelineConfig& config, const DatasetRecord& rec,
                                   const GroundInputs& inputs,
                                   std::map<std::string, DebiasedQuerySet>& debiased,
                                   std::map<std::string, CaptionTrack>& tracks,
                                   EmbedProvider* embedder) {
  if (inputs.matrix_dir) {
    fs::path p = *inputs.matrix_dir / (rec.qid + ".glsm");
    if (!fs::exists(p))
      throw ParseError("similarity matrix not found at " + p.string() +
                       "; run `groundline export-matrix` first");
    return matrix_from_file(load_matrix(p), rec.video_id, config.dataset.fps, rec.qid);
  }
  auto it = debiased.find(rec.qid);
  if (it == debiased.end())
    throw ParseError("qid " + rec.qid + " missing from " + inputs.debiased_path.string() +
                     "; rerun `groundline debias`");
  if (embedder == nullptr) throw ProviderError("no embeddings provider configured");
  const auto& track =
      track_for(tracks, inputs.captions_dir, rec.video_id, config.dataset.fps, rec.duration);
  return build_similarity(it->second, track, *embedder, config.providers.embed_model);
}

}  // namespace

void run_ground(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                const GroundInputs& inputs, EmbedProvider* embedder, const fs::path& out_path) {
  std::map<std::string, DebiasedQuerySet> debiased;
  if (!inputs.matrix_dir) debiased = load_debiased_map(inputs.debiased_path);
  std::map<std::string, CaptionTrack> tracks;
  PredictionMap preds;
  SaliencyPredictionMap sal;
  for (const auto& rec : records) {
    auto matrix = matrix_for_record(config, rec, inputs, debiased, tracks, embedder);
    auto ranked = ground(matrix, config.generator, config.scorer, config.nms);
    auto& list = preds[rec.qid];
    list.reserve(ranked.size());
    for (const auto& r : ranked) list.push_back(Prediction{r.segment, r.score});
    sal[rec.qid] = saliency(matrix);
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_predictions_jsonl(out_path.string(), records, preds, sal);
}

void run_export_matrix(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                       const GroundInputs& inputs, EmbedProvider& embedder,
                       const fs::path& out_dir) {
  auto debiased = load_debiased_map(inputs.debiased_path);
  std::map<std::string, CaptionTrack> tracks;
  fs::create_directories(out_dir);
  GroundInputs no_matrix = inputs;
  no_matrix.matrix_dir.reset();
  for (const auto& rec : records) {
    auto matrix = matrix_for_record(config, rec, no_matrix, debiased, tracks, &embedder);
    save_matrix(out_dir / (rec.qid + ".glsm"), matrix);
  }
}

MetricReport run_eval(const std::vector<DatasetRecord>& records, const fs::path& pred_path,
                      const EvalOptions& options, const fs::path& report_path) {
  if (!fs::exists(pred_path))
    throw SchemaError("prediction file not found at " + pred_path.string());
  PredictionMap preds;
  SaliencyPredictionMap sal;
  read_predictions_jsonl(pred_path.string(), preds, sal);
  auto gts = records_to_ground_truth(records);
  auto saliency_gts = records_to_saliency(records);
  if (!saliency_gts.empty() && sal.empty()) {
    warn("ground truth has saliency annotations but predictions carry no scores; skipping "
         "highlight metrics");
    saliency_gts.clear();
  }
  auto report = evaluate(preds, gts, sal, saliency_gts, options);
  if (!report_path.empty()) atomic_write_file(report_path, report_json(report) + "\n");
  return report;
}

namespace {

struct FixtureRng {
  std::uint64_t state;
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(splitmix64(state) % n); }
};

const char* kSubjects[] = {"a man",    "a woman",     "a dog",    "a chef",
                           "a child",  "a runner",    "a painter", "a guitarist"};
const char* kVerbs[] = {"opens", "closes", "washes", "paints", "carries", "throws", "kicks",
                        "stirs"};
const char* kObjects[] = {"the red door",    "a wooden box",  "the small window", "a blue ball",
                          "the metal pan",   "a heavy bag",   "the green fence",  "a paper map"};
const char* kFillers[] = {"trees", "clouds", "traffic", "shelves", "snow", "sand", "birds",
                          "lights"};
const char* kPlaces[] = {"street", "kitchen", "park",  "hallway",
                         "garden", "garage",  "beach", "stairs"};

}  // namespace

void make_fixture(const FixtureSpec& spec) {
  if (spec.n_videos == 0 || spec.n_queries == 0)
    throw SchemaError("fixture needs at least one video and one query");
  if (spec.n_queries > 4 * spec.n_videos)
    throw SchemaError("fixture supports at most 4 queries per video");
  if (spec.fps <= 0.0) throw SchemaError("fixture fps must be positive");
  FixtureRng rng{spec.seed * 0x9e3779b97f4a7c15ULL + 1};
  fs::path frames_root = spec.dir / "frames";
  fs::create_directories(frames_root);

  // Each video is a row of 2-second clips; each query's event occupies a
  // slice of one quarter so events never collide.
  struct Event {
    std::size_t video = 0;
    std::size_t start_clip = 0;
    std::size_t len = 0;
    std::string caption;
    std::string query;
  };
  std::vector<std::size_t> clips_per_video(spec.n_videos);
  for (std::size_t i = 0; i < spec.n_videos; ++i) clips_per_video[i] = 32 + (i % 4) * 8;

  std::vector<Event> events(spec.n_queries);
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    Event& ev = events[q];
    ev.video = q % spec.n_videos;
    std::size_t quarter = q / spec.n_videos;  // 0..3
    std::size_t n_clips = clips_per_video[ev.video];
    std::size_t q_start = quarter * n_clips / 4;
    std::size_t q_len = (quarter + 1) * n_clips / 4 - q_start;
    // Events span at least 8 clips so the default top-k statistic lands on
    // event frames rather than on the background.
    ev.len = 8 + rng.below(std::min<std::size_t>(q_len - 8, 4) + 1);
    ev.start_clip = q_start + rng.below(q_len - ev.len + 1);
    const char* subject = kSubjects[rng.below(8)];
    const char* verb = kVerbs[rng.below(8)];
    const char* object = kObjects[rng.below(8)];
    ev.caption = std::string(subject) + " " + verb + " " + object + " near the camera.";
    ev.query = std::string(subject) + " " + verb + " " + object;
  }

  // Frame files: the caption a frame should receive is embedded in its
  // bytes, which is the contract the offline captioner understands.
  for (std::size_t i = 0; i < spec.n_videos; ++i) {
    char vid[32];
    std::snprintf(vid, sizeof(vid), "v%03zu", i);
    fs::create_directories(frames_root / vid);
    std::size_t n_clips = clips_per_video[i];
    for (std::size_t f = 0; f < n_clips; ++f) {
      // Background captions vary per frame so their similarities spread over
      // the histogram instead of collapsing into one bin.
      std::string caption = std::string("a quiet scene with ") + kFillers[(i + f) % 8] +
                            " near the " + kPlaces[(3 * f + i) % 8] + ".";
      for (const auto& ev : events)
        if (ev.video == i && f >= ev.start_clip && f < ev.start_clip + ev.len)
          caption = ev.caption;
      char name[32];
      std::snprintf(name, sizeof(name), "%06zu.jpg", f);
      atomic_write_file(frames_root / vid / name, "[[" + caption + "]]");
    }
  }

  double clip_seconds = 1.0 / spec.fps;
  std::vector<nlohmann::json> rows;
  for (std::size_t q = 0; q < spec.n_queries; ++q) {
    const Event& ev = events[q];
    char vid[32];
    std::snprintf(vid, sizeof(vid), "v%03zu", ev.video);
    double duration = clips_per_video[ev.video] * clip_seconds;
    double start = ev.start_clip * clip_seconds;
    double end = (ev.start_clip + ev.len) * clip_seconds;
    nlohmann::json row;
    row["qid"] = 1000 + static_cast<long long>(q);
    row["query"] = ev.query;
    row["vid"] = vid;
    row["duration"] = duration;
    row["relevant_windows"] = nlohmann::json::array({{start, end}});
    auto clip_ids = nlohmann::json::array();
    auto scores = nlohmann::json::array();
    for (std::size_t c = ev.start_clip; c < ev.start_clip + ev.len; ++c) {
      clip_ids.push_back(c);
      scores.push_back({4, 2 + static_cast<int>(rng.below(3)), 2 + static_cast<int>(rng.below(3))});
    }
    row["relevant_clip_ids"] = clip_ids;
    row["saliency_scores"] = scores;
    rows.push_back(std::move(row));
  }
  atomic_write_file(spec.dir / "dataset.jsonl", to_jsonl(rows));

  PipelineConfig config = default_config("qvhighlights");
  config.dataset.fps = spec.fps;
  config.dataset.annotation_path = (spec.dir / "dataset.jsonl").string();
  config.dataset.frames_dir = (spec.dir / "frames").string();
  config.cache_dir = (spec.dir / "cache").string();
  config.seed = spec.seed;
  save_config(spec.dir / "config.json", config);
}

}  // namespace groundline
