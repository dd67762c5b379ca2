#pragma once

#include "groundline/captioner.hpp"
#include "groundline/data_io.hpp"
#include "groundline/eval.hpp"
#include "groundline/gateway.hpp"
#include "groundline/grounder.hpp"
#include "groundline/querygen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace groundline {

struct DatasetConfig {
  std::string kind = "qvhighlights";  // qvhighlights | charades_sta | activitynet
  std::string annotation_path;
  std::string durations_path;  // charades_sta sidecar, unused otherwise
  std::string frames_dir;
  double fps = 0.5;
};

struct ProvidersConfig {
  std::string chat_base_url;   // empty: $GROUNDLINE_CHAT_BASE_URL
  std::string embed_base_url;  // empty: $GROUNDLINE_EMBED_BASE_URL
  std::string chat_model = "minigpt-v2";            // captioning model
  std::string debias_model = "baichuan2-7b-chat";   // query rewriting model
  std::string embed_model = "sentence-bert";
  double caption_temperature = 0.1;
  double debias_temperature = 0.2;
  std::size_t embed_dim = 384;  // offline embedding width
  int max_in_flight = 4;
};

// The single configuration document every subcommand reads. JSON on disk;
// any field reachable by a dotted path is flag-overridable.
struct PipelineConfig {
  DatasetConfig dataset;
  ProvidersConfig providers;
  std::size_t n_q = 5;
  GeneratorConfig generator;
  ScorerConfig scorer;
  NmsConfig nms;
  std::string cache_dir = "cache";
  std::uint64_t seed = 0;

  void validate() const;
};

// Defaults per dataset: fps 0.5 for qvhighlights and charades_sta, 1/3 for
// activitynet; everything else shared.
PipelineConfig default_config(const std::string& dataset_kind = "qvhighlights");

nlohmann::json config_to_json(const PipelineConfig& config);
// Starts from defaults and overlays the present fields; unknown keys are
// rejected so a mistyped override fails loudly.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

// Sets `doc` at "a.b.c" to the JSON parse of `value` (falling back to a
// plain string). Intermediate objects must already exist.
void apply_override(nlohmann::json& doc, const std::string& dotted_path, const std::string& value);

// "key=v1,v2,..." -> (key, [v1, v2, ...]).
std::pair<std::string, std::vector<std::string>> parse_sweep(const std::string& sweep_spec);

std::vector<DatasetRecord> load_dataset(const DatasetConfig& dataset);

struct Providers {
  std::shared_ptr<ResponseCache> cache;
  std::shared_ptr<ChatProvider> debias_chat;
  std::shared_ptr<ChatProvider> caption_chat;
  std::shared_ptr<EmbedProvider> embedder;
};

// Offline: deterministic local doubles seeded from config.seed. Online:
// HTTP providers against the configured (or environment) base URLs. Both
// are wrapped in the replay cache under config.cache_dir.
Providers make_providers(const PipelineConfig& config, bool offline);

// Stage drivers. These are the bodies of the CLI subcommands; they throw on
// hard failure and the CLI maps exceptions to exit codes.
void run_debias(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                ChatProvider& chat, const std::filesystem::path& out_path);

void run_caption(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                 ChatProvider& chat, int jobs, const std::filesystem::path& out_dir);

struct GroundInputs {
  std::filesystem::path debiased_path;
  std::filesystem::path captions_dir;
  // When set, similarity is read from {matrix_dir}/{qid}.glsm and no
  // provider is needed.
  std::optional<std::filesystem::path> matrix_dir;
};

void run_ground(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                const GroundInputs& inputs, EmbedProvider* embedder,
                const std::filesystem::path& out_path);

// Computes and saves {out_dir}/{qid}.glsm for every record.
void run_export_matrix(const PipelineConfig& config, const std::vector<DatasetRecord>& records,
                       const GroundInputs& inputs, EmbedProvider& embedder,
                       const std::filesystem::path& out_dir);

// Evaluates a prediction file against the configured dataset. Writes the
// JSON report when report_path is non-empty; returns the report.
MetricReport run_eval(const std::vector<DatasetRecord>& records,
                      const std::filesystem::path& pred_path, const EvalOptions& options,
                      const std::filesystem::path& report_path);

// Synthetic offline corpus: frame files whose bytes carry their caption,
// a dataset JSONL with windows and saliency, and a ready-to-run config.
struct FixtureSpec {
  std::filesystem::path dir;
  std::size_t n_videos = 20;
  std::size_t n_queries = 40;
  std::uint64_t seed = 7;
  double fps = 0.5;
};

void make_fixture(const FixtureSpec& spec);

}  // namespace groundline
