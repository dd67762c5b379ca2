#include "groundline/captioner.hpp"
#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <doctest.h>

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

using namespace groundline;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("groundline_test_cap_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Answers by frame path; thread-safe so it can back jobs > 1.
class FrameChat final : public ChatProvider {
 public:
  std::string chat(const ChatRequest& req) override {
    std::lock_guard lock(mu_);
    ++calls;
    REQUIRE(req.messages.size() == 1);
    REQUIRE(req.messages[0].image_path.has_value());
    auto it = answers.find(*req.messages[0].image_path);
    REQUIRE(it != answers.end());
    return it->second;
  }
  std::map<std::string, std::string> answers;
  int calls = 0;

 private:
  std::mutex mu_;
};

struct Fixture {
  fs::path dir;
  FrameTimeline timeline;
  FrameChat provider;

  explicit Fixture(const std::string& tag, std::size_t n_frames = 4) : dir(temp_dir(tag)) {
    std::vector<std::string> refs;
    for (std::size_t j = 0; j < n_frames; ++j) {
      char name[16];
      std::snprintf(name, sizeof name, "%06zu.jpg", j);
      auto path = dir / name;
      atomic_write_file(path, "frame " + std::to_string(j));
      provider.answers[path.string()] = "caption " + std::to_string(j);
      refs.push_back(path.string());
    }
    timeline = FrameTimeline("vid", 0.5, 2.0 * static_cast<double>(n_frames), std::move(refs));
  }
};

}  // namespace

TEST_SUITE("captioner") {
  TEST_CASE("caption prompt pins the instruction and attaches the frame") {
    auto dir = temp_dir("prompt");
    auto frame = dir / "000000.jpg";
    atomic_write_file(frame, "bytes");
    CaptionOptions options;
    auto req = build_caption_prompt(frame.string(), options);
    CHECK(req.model_id == "minigpt-v2");
    CHECK(req.temperature == doctest::Approx(0.1));
    REQUIRE(req.messages.size() == 1);
    CHECK(req.messages[0].content ==
          "[image caption] Please describe the content of this image in detail.");
    CHECK(req.messages[0].image_path == frame.string());
  }

  TEST_CASE("missing, empty or directory frames are rejected") {
    auto dir = temp_dir("badframe");
    CaptionOptions options;
    CHECK_THROWS_AS(build_caption_prompt((dir / "nope.jpg").string(), options), MissingFrame);
    atomic_write_file(dir / "empty.jpg", "");
    CHECK_THROWS_AS(build_caption_prompt((dir / "empty.jpg").string(), options), MissingFrame);
    CHECK_THROWS_AS(build_caption_prompt(dir.string(), options), MissingFrame);
  }

  TEST_CASE("caption_video keeps frame order") {
    Fixture fx("order");
    auto track = caption_video(fx.timeline, fx.provider, CaptionOptions{});
    CHECK(track.video_id == "vid");
    REQUIRE(track.captions.size() == 4);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(track.captions[j] == "caption " + std::to_string(j));
    CHECK(fx.provider.calls == 4);
  }

  TEST_CASE("blank captions become the sentinel") {
    Fixture fx("blank");
    fx.provider.answers[fx.timeline.frame_refs[2]] = "  \n ";
    auto track = caption_video(fx.timeline, fx.provider, CaptionOptions{});
    CHECK(track.captions[2] == "(no caption)");
    CHECK(track.captions[1] == "caption 1");
  }

  TEST_CASE("parallel captioning matches serial output") {
    Fixture fx("par", 12);
    CaptionOptions serial;
    CaptionOptions parallel;
    parallel.jobs = 4;
    auto a = caption_video(fx.timeline, fx.provider, serial);
    auto b = caption_video(fx.timeline, fx.provider, parallel);
    CHECK(a.captions == b.captions);
  }

  TEST_CASE("provider failures propagate from workers") {
    Fixture fx("fail");
    struct Boom final : ChatProvider {
      std::string chat(const ChatRequest&) override { throw TransportError("down"); }
    } boom;
    CHECK_THROWS_AS(caption_video(fx.timeline, boom, CaptionOptions{}), TransportError);
    CaptionOptions parallel;
    parallel.jobs = 3;
    CHECK_THROWS_AS(caption_video(fx.timeline, boom, parallel), TransportError);
  }

  TEST_CASE("a vanished frame fails the run") {
    Fixture fx("vanish");
    fs::remove(fx.timeline.frame_refs[1]);
    CHECK_THROWS_AS(caption_video(fx.timeline, fx.provider, CaptionOptions{}), MissingFrame);
  }

  TEST_CASE("caption tracks round-trip through jsonl") {
    Fixture fx("roundtrip");
    auto track = caption_video(fx.timeline, fx.provider, CaptionOptions{});
    auto path = fx.dir / "captions.jsonl";
    save_caption_jsonl(path, track);
    auto loaded = load_caption_jsonl(path, 0.5, 8.0);
    CHECK(loaded.video_id == "vid");
    CHECK(loaded.captions == track.captions);
    CHECK(loaded.timeline.n_frames() == 4);
    CHECK(frame_index_to_segment(3, loaded.timeline.fps).start == doctest::Approx(6.0));
    CHECK(frame_index_to_segment(3, loaded.timeline.fps).end == doctest::Approx(8.0));

    // Records shuffled on disk still load in frame order.
    auto records = read_jsonl(path);
    std::swap(records[0], records[3]);
    atomic_write_file(path, to_jsonl(records));
    auto reordered = load_caption_jsonl(path, 0.5, 8.0);
    CHECK(reordered.captions == track.captions);
  }

  TEST_CASE("gaps, duplicates and mixed videos are schema errors") {
    Fixture fx("badfile");
    auto track = caption_video(fx.timeline, fx.provider, CaptionOptions{});
    auto path = fx.dir / "captions.jsonl";

    save_caption_jsonl(path, track);
    auto records = read_jsonl(path);
    records.erase(records.begin() + 1);  // gap at frame 1
    atomic_write_file(path, to_jsonl(records));
    CHECK_THROWS_AS(load_caption_jsonl(path, 0.5, 8.0), SchemaError);

    save_caption_jsonl(path, track);
    records = read_jsonl(path);
    records[2]["frame_index"] = 1;  // duplicate frame 1
    atomic_write_file(path, to_jsonl(records));
    CHECK_THROWS_AS(load_caption_jsonl(path, 0.5, 8.0), SchemaError);

    save_caption_jsonl(path, track);
    records = read_jsonl(path);
    records[2]["video_id"] = "other";
    atomic_write_file(path, to_jsonl(records));
    CHECK_THROWS_AS(load_caption_jsonl(path, 0.5, 8.0), SchemaError);

    atomic_write_file(path, "");
    CHECK_THROWS_AS(load_caption_jsonl(path, 0.5, 8.0), SchemaError);

    save_caption_jsonl(path, track);
    records = read_jsonl(path);
    records[0].erase("caption");
    atomic_write_file(path, to_jsonl(records));
    CHECK_THROWS_AS(load_caption_jsonl(path, 0.5, 8.0), SchemaError);
  }

  TEST_CASE("frame listing is ordered and image-only") {
    auto dir = temp_dir("listing");
    atomic_write_file(dir / "000002.jpg", "c");
    atomic_write_file(dir / "000000.jpg", "a");
    atomic_write_file(dir / "000001.png", "b");
    atomic_write_file(dir / "notes.txt", "skip me");
    auto files = list_frame_files(dir);
    REQUIRE(files.size() == 3);
    CHECK(fs::path(files[0]).filename() == "000000.jpg");
    CHECK(fs::path(files[1]).filename() == "000001.png");
    CHECK(fs::path(files[2]).filename() == "000002.jpg");

    CHECK_THROWS_AS(list_frame_files(dir / "missing"), MissingFrame);
    auto empty = temp_dir("listing_empty");
    CHECK_THROWS_AS(list_frame_files(empty), MissingFrame);
  }

  TEST_CASE("caption count must match the timeline") {
    Fixture fx("mismatch");
    CHECK_THROWS_AS(CaptionTrack(fx.timeline, {"one", "two"}), std::invalid_argument);
  }

  TEST_CASE("offline double reads embedded fixture captions") {
    auto dir = temp_dir("marker");
    atomic_write_file(dir / "000000.jpg", "[[a chef slices onions.]]");
    atomic_write_file(dir / "000001.jpg", "[[steam rises from a pot.]]");
    FrameTimeline timeline("vid", 0.5, 4.0,
                           {(dir / "000000.jpg").string(), (dir / "000001.jpg").string()});
    auto provider = make_offline_chat_provider({});
    auto track = caption_video(timeline, *provider, CaptionOptions{});
    CHECK(track.captions[0] == "a chef slices onions.");
    CHECK(track.captions[1] == "steam rises from a pot.");
  }
}
