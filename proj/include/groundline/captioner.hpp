#pragma once

#include "groundline/core.hpp"
#include "groundline/gateway.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace groundline {

// Per-frame captions aligned index-for-index with the timeline.
struct CaptionTrack {
  std::string video_id;
  FrameTimeline timeline;
  std::vector<std::string> captions;

  CaptionTrack() = default;
  CaptionTrack(FrameTimeline timeline, std::vector<std::string> captions);
};

struct SamplingPolicy {
  double fps = 0.5;  // 0.5 for QVHighlights/Charades-STA, 1/3 for ActivityNet-Captions
};

struct CaptionOptions {
  std::string model_id = "minigpt-v2";
  double temperature = 0.1;
  int jobs = 1;
};

// User message is the fixed captioning instruction with the frame attached.
// Throws MissingFrame when the file is absent or unreadable.
ChatRequest build_caption_prompt(const std::string& frame_ref, const CaptionOptions& options);

// One caption per frame, order preserved. Empty or whitespace-only captions
// become the "(no caption)" sentinel.
CaptionTrack caption_video(const FrameTimeline& timeline, ChatProvider& provider,
                           const CaptionOptions& options);

// JSONL exchange format, one record per frame:
// {"video_id": ..., "frame_index": i, "t": seconds, "caption": "..."}.
// Also the import format for externally produced captions.
void save_caption_jsonl(const std::filesystem::path& path, const CaptionTrack& track);
CaptionTrack load_caption_jsonl(const std::filesystem::path& path, double fps, double duration);

// Frame files for one video, lexicographically ordered ({index:06}.jpg).
std::vector<std::string> list_frame_files(const std::filesystem::path& video_frames_dir);

}  // namespace groundline
