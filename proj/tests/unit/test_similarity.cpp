#include "groundline/errors.hpp"
#include "groundline/hashing.hpp"
#include "groundline/jsonl.hpp"
#include "groundline/similarity.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

using namespace groundline;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("groundline_test_sim_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Embeds any known text to a fixed vector.
class TableEmbed final : public EmbedProvider {
 public:
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const std::string& model_id) override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      auto it = table.find(t);
      REQUIRE(it != table.end());
      out.push_back(EmbeddingVector{it->second, model_id});
    }
    if (drop_last && !out.empty()) out.pop_back();
    return out;
  }
  std::map<std::string, std::vector<double>> table;
  bool drop_last = false;
};

CaptionTrack make_track(const std::vector<std::string>& captions) {
  std::vector<std::string> refs;
  for (std::size_t j = 0; j < captions.size(); ++j)
    refs.push_back("vid#" + std::to_string(j));
  FrameTimeline timeline("vid", 0.5, 2.0 * static_cast<double>(captions.size()), std::move(refs));
  return CaptionTrack(timeline, captions);
}

SimilarityMatrix small_matrix() {
  std::vector<double> values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<std::string> refs{"v#0", "v#1", "v#2"};
  return SimilarityMatrix(values, 2, 3, {"q#0", "q#1"},
                          FrameTimeline("v", 0.5, 6.0, refs));
}

}  // namespace

TEST_SUITE("similarity") {
  TEST_CASE("cosine matches hand values") {
    CHECK(cosine({1.0, 0.0}, {0.0, 2.0}) == doctest::Approx(0.0));
    CHECK(cosine({3.0, 0.0}, {5.0, 0.0}) == doctest::Approx(1.0));  // length-invariant
    CHECK(cosine({1.0, 0.0}, {1.0, 1.0}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(cosine({1.0, 2.0}, {-1.0, -2.0}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(cosine({1.0}, {1.0, 0.0}), DimensionMismatch);
    CHECK_THROWS_AS(cosine({0.0, 0.0}, {1.0, 0.0}), ZeroVector);
  }

  TEST_CASE("cosine is symmetric and bounded") {
    std::uint64_t state = 17;
    for (int round = 0; round < 200; ++round) {
      std::vector<double> a(8), b(8);
      for (int i = 0; i < 8; ++i) {
        a[i] = unit_double(state);
        b[i] = unit_double(state);
      }
      const double ab = cosine(a, b);
      CHECK(cosine(b, a) == doctest::Approx(ab).epsilon(1e-12));
      CHECK(ab <= 1.0 + 1e-12);
      CHECK(ab >= -1.0 - 1e-12);
      CHECK(cosine(a, a) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("build_similarity computes the query-by-frame cosine grid") {
    DebiasedQuerySet queries{Query("q1", "who cares"), {"r0", "r1"}};
    auto track = make_track({"c0", "c1", "c2"});
    TableEmbed embedder;
    embedder.table["r0"] = {1.0, 0.0, 0.0};
    embedder.table["r1"] = {0.0, 1.0, 0.0};
    embedder.table["c0"] = {1.0, 0.0, 0.0};
    embedder.table["c1"] = {0.6, 0.8, 0.0};
    embedder.table["c2"] = {0.0, 0.0, 1.0};
    auto matrix = build_similarity(queries, track, embedder, "m");
    CHECK(matrix.n_q == 2);
    CHECK(matrix.n_v == 3);
    CHECK(matrix.at(0, 0) == doctest::Approx(1.0));
    CHECK(matrix.at(0, 1) == doctest::Approx(0.6));
    CHECK(matrix.at(0, 2) == doctest::Approx(0.0));
    CHECK(matrix.at(1, 0) == doctest::Approx(0.0));
    CHECK(matrix.at(1, 1) == doctest::Approx(0.8));
    CHECK(matrix.at(1, 2) == doctest::Approx(0.0));
    REQUIRE(matrix.query_ids.size() == 2);
    CHECK(matrix.query_ids[0] == "q1#0");
    CHECK(matrix.query_ids[1] == "q1#1");
    CHECK(matrix.timeline.video_id == "vid");
    CHECK(matrix.timeline.fps == doctest::Approx(0.5));
  }

  TEST_CASE("a short embed response is a provider error") {
    DebiasedQuerySet queries{Query("q1", "x"), {"r0"}};
    auto track = make_track({"c0"});
    TableEmbed embedder;
    embedder.table["r0"] = {1.0, 0.0};
    embedder.table["c0"] = {1.0, 0.0};
    embedder.drop_last = true;
    CHECK_THROWS_AS(build_similarity(queries, track, embedder, "m"), ProviderError);
  }

  TEST_CASE("an empty track is rejected") {
    DebiasedQuerySet queries{Query("q1", "x"), {"r0"}};
    CaptionTrack empty;
    TableEmbed embedder;
    CHECK_THROWS_AS(build_similarity(queries, empty, embedder, "m"), std::invalid_argument);
  }

  TEST_CASE("identical texts score 1 under the offline embedder") {
    DebiasedQuerySet queries{Query("q1", "x"), {"a cat sleeps on the rug"}};
    auto track = make_track({"a cat sleeps on the rug", "a truck engine idles"});
    auto embedder = make_offline_embed_provider(96, 5);
    auto matrix = build_similarity(queries, track, *embedder, "m");
    CHECK(matrix.at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(matrix.at(0, 1) < matrix.at(0, 0));
  }

  TEST_CASE("matrix files round-trip") {
    auto dir = temp_dir("roundtrip");
    auto path = dir / "m.glsm";
    auto matrix = small_matrix();
    save_matrix(path, matrix);
    auto file = load_matrix(path);
    CHECK(file.version == 1);
    CHECK(file.n_q == 2);
    CHECK(file.n_v == 3);
    REQUIRE(file.values.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      // float32 storage: exact only to single precision
      CHECK(file.values[i] ==
            doctest::Approx(matrix.values[i]).epsilon(1e-6));
      CHECK(file.values[i] == static_cast<float>(matrix.values[i]));
    }

    // Byte-identical on re-save.
    auto first = read_file(path);
    save_matrix(dir / "m2.glsm", matrix);
    CHECK(read_file(dir / "m2.glsm") == first);

    // Header layout: magic, version, shape, then the payload.
    REQUIRE(first.size() == 14 + 4 * 6);
    CHECK(first.substr(0, 4) == "GLSM");
    CHECK(static_cast<unsigned char>(first[4]) == 1);
    CHECK(static_cast<unsigned char>(first[6]) == 2);  // n_q low byte
    CHECK(static_cast<unsigned char>(first[10]) == 3);  // n_v low byte
  }

  TEST_CASE("matrix_from_file rebuilds shape and timeline") {
    auto dir = temp_dir("fromfile");
    auto path = dir / "m.glsm";
    save_matrix(path, small_matrix());
    auto rebuilt = matrix_from_file(load_matrix(path), "video7", 0.5, "q42");
    CHECK(rebuilt.n_q == 2);
    CHECK(rebuilt.n_v == 3);
    CHECK(rebuilt.timeline.video_id == "video7");
    CHECK(rebuilt.timeline.duration == doctest::Approx(6.0));
    CHECK(rebuilt.timeline.n_frames() == 3);
    CHECK(rebuilt.query_ids[1] == "q42#1");
    CHECK(rebuilt.at(1, 2) == doctest::Approx(0.6).epsilon(1e-6));
  }

  TEST_CASE("malformed matrix files are schema errors") {
    auto dir = temp_dir("badglsm");
    auto good = dir / "good.glsm";
    save_matrix(good, small_matrix());
    const auto bytes = read_file(good);

    atomic_write_file(dir / "short.glsm", bytes.substr(0, 8));
    CHECK_THROWS_AS(load_matrix(dir / "short.glsm"), SchemaError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    atomic_write_file(dir / "magic.glsm", bad_magic);
    CHECK_THROWS_AS(load_matrix(dir / "magic.glsm"), SchemaError);

    auto bad_version = bytes;
    bad_version[4] = 2;
    atomic_write_file(dir / "version.glsm", bad_version);
    CHECK_THROWS_AS(load_matrix(dir / "version.glsm"), SchemaError);

    atomic_write_file(dir / "trunc.glsm", bytes.substr(0, bytes.size() - 4));
    CHECK_THROWS_AS(load_matrix(dir / "trunc.glsm"), SchemaError);

    auto padded = bytes + std::string(4, '\0');
    atomic_write_file(dir / "padded.glsm", padded);
    CHECK_THROWS_AS(load_matrix(dir / "padded.glsm"), SchemaError);
  }
}
