#include "groundline/captioner.hpp"

#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <thread>

namespace groundline {

namespace fs = std::filesystem;

namespace {
constexpr const char* kCaptionInstruction =
    "[image caption] Please describe the content of this image in detail.";
constexpr const char* kNoCaptionSentinel = "(no caption)";

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}
}  // namespace

CaptionTrack::CaptionTrack(FrameTimeline timeline_, std::vector<std::string> captions_)
    : video_id(timeline_.video_id), timeline(std::move(timeline_)),
      captions(std::move(captions_)) {
  if (captions.size() != timeline.n_frames())
    throw std::invalid_argument("CaptionTrack: caption count does not match frames for video '" +
                                video_id + "'");
}

ChatRequest build_caption_prompt(const std::string& frame_ref, const CaptionOptions& options) {
  std::error_code ec;
  if (!fs::exists(frame_ref, ec) || fs::is_directory(frame_ref, ec) ||
      fs::file_size(frame_ref, ec) == 0 || ec)
    throw MissingFrame("frame file missing or unreadable: " + frame_ref);
  ChatRequest req;
  req.model_id = options.model_id;
  req.temperature = options.temperature;
  req.messages.push_back(ChatMessage{"user", kCaptionInstruction, frame_ref});
  return req;
}

CaptionTrack caption_video(const FrameTimeline& timeline, ChatProvider& provider,
                           const CaptionOptions& options) {
  const std::size_t n = timeline.n_frames();
  std::vector<std::string> captions(n);

  const int jobs = std::max(1, options.jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= n) return;
      try {
        auto caption = provider.chat(build_caption_prompt(timeline.frame_refs[j], options));
        if (is_blank(caption)) {
          warn("empty caption for frame " + std::to_string(j) + " of video '" +
               timeline.video_id + "'");
          caption = kNoCaptionSentinel;
        }
        captions[j] = std::move(caption);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);  // drain remaining work
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return CaptionTrack(timeline, std::move(captions));
}

void save_caption_jsonl(const fs::path& path, const CaptionTrack& track) {
  std::vector<json> records;
  records.reserve(track.captions.size());
  for (std::size_t j = 0; j < track.captions.size(); ++j) {
    records.push_back(json{{"video_id", track.video_id},
                           {"frame_index", j},
                           {"t", static_cast<double>(j) / track.timeline.fps},
                           {"caption", track.captions[j]}});
  }
  atomic_write_file(path, to_jsonl(records));
}

CaptionTrack load_caption_jsonl(const fs::path& path, double fps, double duration) {
  const auto records = read_jsonl(path);
  if (records.empty()) throw SchemaError("caption file is empty: " + path.string());
  std::string video_id;
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::size_t lineno = 0;
  for (const auto& r : records) {
    ++lineno;
    if (!r.contains("video_id") || !r.contains("frame_index") || !r.contains("caption"))
      throw SchemaError("caption record needs video_id/frame_index/caption in " + path.string(),
                        lineno);
    if (video_id.empty()) video_id = r["video_id"].get<std::string>();
    if (r["video_id"].get<std::string>() != video_id)
      throw SchemaError("mixed video ids in caption file " + path.string(), lineno);
    rows.emplace_back(r["frame_index"].get<std::size_t>(), r["caption"].get<std::string>());
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> captions;
  std::vector<std::string> refs;
  captions.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].first != j)
      throw SchemaError("caption file has a gap or duplicate at frame " + std::to_string(j) +
                        " in " + path.string());
    captions.push_back(rows[j].second);
    refs.push_back(video_id + "#" + std::to_string(j));
  }
  return CaptionTrack(FrameTimeline(video_id, fps, duration, std::move(refs)),
                      std::move(captions));
}

std::vector<std::string> list_frame_files(const fs::path& video_frames_dir) {
  std::error_code ec;
  if (!fs::is_directory(video_frames_dir, ec))
    throw MissingFrame("frames directory missing: " + video_frames_dir.string());
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(video_frames_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".png")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw MissingFrame("no frame files under " + video_frames_dir.string());
  return files;
}

}  // namespace groundline
