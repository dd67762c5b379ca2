#include "groundline/errors.hpp"
#include "groundline/eval.hpp"
#include "groundline/gateway.hpp"
#include "groundline/jsonl.hpp"
#include "groundline/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace groundline;

namespace {

// Round to 1e-9 so "0.5:0.05:0.95" lands on the same doubles as the
// built-in grid.
double snap(double v) { return std::round(v * 1e9) / 1e9; }

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0.0;
  double step = 0.0;
  double stop = 0.0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3 || step <= 0.0 ||
      stop < start)
    throw SchemaError("grid must look like start:step:stop, got: " + spec);
  std::vector<double> grid;
  auto n = static_cast<long long>(std::llround((stop - start) / step));
  for (long long i = 0; i <= n; ++i) grid.push_back(snap(start + static_cast<double>(i) * step));
  return grid;
}

std::vector<double> parse_thresholds(const std::string& spec) {
  std::vector<double> out;
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(snap(std::stod(item)));
  if (out.empty()) throw SchemaError("no thresholds in: " + spec);
  return out;
}

// Shared per-subcommand state: config path, overrides, provider mode.
struct CommonFlags {
  std::string config_path;
  std::string cache_dir;
  bool offline = false;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config JSON");
    cmd->add_option("--cache-dir", cache_dir, "response cache directory (overrides config)");
    cmd->add_flag("--offline", offline, "use the deterministic offline providers");
    cmd->add_option("--seed", seed, "offline provider seed (overrides config)");
    cmd->allow_extras();  // remaining --a.b.c VALUE pairs become config overrides
  }

  PipelineConfig load(CLI::App* cmd) const {
    nlohmann::json doc;
    if (config_path.empty())
      doc = config_to_json(default_config());
    else
      doc = nlohmann::json::parse(read_file(config_path));
    auto extras = cmd->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string key = extras[i];
      if (key.rfind("--", 0) != 0 || i + 1 >= extras.size())
        throw SchemaError("expected --dotted.path VALUE override, got: " + key);
      apply_override(doc, key.substr(2), extras[++i]);
    }
    auto config = config_from_json(doc);
    if (!cache_dir.empty()) config.cache_dir = cache_dir;
    if (seed) config.seed = *seed;
    return config;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"zero-shot video temporal grounding from frame captions"};
  app.require_subcommand(1);

  // init-config
  auto* init_cmd = app.add_subcommand("init-config", "write a default config");
  std::string init_kind = "qvhighlights";
  std::string init_out = "config.json";
  init_cmd->add_option("--kind", init_kind, "qvhighlights | charades_sta | activitynet");
  init_cmd->add_option("--out", init_out, "output path");

  // make-fixture
  auto* fixture_cmd = app.add_subcommand("make-fixture", "generate a synthetic offline corpus");
  FixtureSpec fixture;
  std::string fixture_dir = "fixture";
  fixture_cmd->add_option("--out", fixture_dir, "fixture directory")->required();
  fixture_cmd->add_option("--videos", fixture.n_videos, "number of videos");
  fixture_cmd->add_option("--queries", fixture.n_queries, "number of queries");
  fixture_cmd->add_option("--seed", fixture.seed, "generator seed");
  fixture_cmd->add_option("--fps", fixture.fps, "sampling rate");

  // debias
  auto* debias_cmd = app.add_subcommand("debias", "rewrite queries into rephrasings");
  CommonFlags debias_flags;
  debias_flags.attach(debias_cmd);
  std::string debias_out = "debiased.jsonl";
  debias_cmd->add_option("--out", debias_out, "output JSONL");

  // caption
  auto* caption_cmd = app.add_subcommand("caption", "caption every sampled frame");
  CommonFlags caption_flags;
  caption_flags.attach(caption_cmd);
  std::string caption_out = "captions";
  int caption_jobs = 4;
  caption_cmd->add_option("--out", caption_out, "output directory (one JSONL per video)");
  caption_cmd->add_option("--jobs", caption_jobs, "captioning worker threads");

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed one text per input line");
  CommonFlags embed_flags;
  embed_flags.attach(embed_cmd);
  std::string embed_in;
  std::string embed_out = "embeddings.jsonl";
  embed_cmd->add_option("--in", embed_in, "text file, one input per line")->required();
  embed_cmd->add_option("--out", embed_out, "output JSONL");

  // ground (also the body of `sweep`)
  auto* ground_cmd = app.add_subcommand("ground", "produce ranked segment predictions");
  CommonFlags ground_flags;
  ground_flags.attach(ground_cmd);
  std::string ground_debiased = "debiased.jsonl";
  std::string ground_captions = "captions";
  std::string ground_matrix;
  std::string ground_out = "predictions.jsonl";
  std::string ground_sweep;
  ground_cmd->add_option("--debiased", ground_debiased, "debiased query JSONL");
  ground_cmd->add_option("--captions", ground_captions, "caption directory");
  ground_cmd->add_option("--matrix", ground_matrix,
                         "directory of {qid}.glsm similarity matrices; skips providers");
  ground_cmd->add_option("--out", ground_out, "prediction JSONL");
  ground_cmd->add_option("--sweep", ground_sweep, "key=v1,v2,... one output per value");

  auto* sweep_cmd = app.add_subcommand("sweep", "ground once per value of a config key");
  CommonFlags sweep_flags;
  sweep_flags.attach(sweep_cmd);
  std::string sweep_debiased = "debiased.jsonl";
  std::string sweep_captions = "captions";
  std::string sweep_matrix;
  std::string sweep_out = "predictions.jsonl";
  std::string sweep_sweep;
  sweep_cmd->add_option("--debiased", sweep_debiased, "debiased query JSONL");
  sweep_cmd->add_option("--captions", sweep_captions, "caption directory");
  sweep_cmd->add_option("--matrix", sweep_matrix, "directory of {qid}.glsm matrices");
  sweep_cmd->add_option("--out", sweep_out, "prediction JSONL stem");
  sweep_cmd->add_option("--sweep", sweep_sweep, "key=v1,v2,...")->required();

  // export-matrix
  auto* export_cmd = app.add_subcommand("export-matrix", "save similarity matrices as GLSM");
  CommonFlags export_flags;
  export_flags.attach(export_cmd);
  std::string export_debiased = "debiased.jsonl";
  std::string export_captions = "captions";
  std::string export_out = "matrices";
  export_cmd->add_option("--debiased", export_debiased, "debiased query JSONL");
  export_cmd->add_option("--captions", export_captions, "caption directory");
  export_cmd->add_option("--out", export_out, "output directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
  CommonFlags eval_flags;
  eval_flags.attach(eval_cmd);
  std::string eval_pred;
  std::string eval_out = "report.json";
  std::string eval_grid = "0.5:0.05:0.95";
  std::string eval_r1 = "0.3,0.5,0.7";
  bool eval_strict = false;
  eval_cmd->add_option("--pred", eval_pred, "prediction JSONL")->required();
  eval_cmd->add_option("--out", eval_out, "report JSON path (empty to skip)");
  eval_cmd->add_option("--grid", eval_grid, "mAP IoU grid start:step:stop");
  eval_cmd->add_option("--r1", eval_r1, "R1 thresholds, comma separated");
  eval_cmd->add_flag("--strict-iou", eval_strict, "require IoU strictly above the threshold");

  CLI11_PARSE(app, argc, argv);

  if (init_cmd->parsed()) {
    save_config(init_out, default_config(init_kind));
    std::cout << "wrote " << init_out << "\n";
    return 0;
  }
  if (fixture_cmd->parsed()) {
    fixture.dir = fixture_dir;
    make_fixture(fixture);
    std::cout << "wrote fixture with " << fixture.n_videos << " videos / " << fixture.n_queries
              << " queries under " << fixture_dir << "\n";
    return 0;
  }
  if (debias_cmd->parsed()) {
    auto config = debias_flags.load(debias_cmd);
    auto records = load_dataset(config.dataset);
    auto providers = make_providers(config, debias_flags.offline);
    run_debias(config, records, *providers.debias_chat, debias_out);
    std::cout << "wrote " << debias_out << " (" << records.size() << " queries)\n";
    return 0;
  }
  if (caption_cmd->parsed()) {
    auto config = caption_flags.load(caption_cmd);
    auto records = load_dataset(config.dataset);
    auto providers = make_providers(config, caption_flags.offline);
    run_caption(config, records, *providers.caption_chat, caption_jobs, caption_out);
    std::cout << "wrote caption tracks under " << caption_out << "\n";
    return 0;
  }
  if (embed_cmd->parsed()) {
    auto config = embed_flags.load(embed_cmd);
    auto providers = make_providers(config, embed_flags.offline);
    std::istringstream lines(read_file(embed_in));
    std::vector<std::string> texts;
    std::string line;
    while (std::getline(lines, line))
      if (!line.empty()) texts.push_back(line);
    auto vectors = providers.embedder->embed(texts, config.providers.embed_model);
    std::vector<json> rows;
    for (std::size_t i = 0; i < texts.size(); ++i)
      rows.push_back({{"index", i}, {"text", texts[i]}, {"embedding", vectors[i].values}});
    atomic_write_file(embed_out, to_jsonl(rows));
    std::cout << "wrote " << embed_out << " (" << texts.size() << " vectors)\n";
    return 0;
  }

  auto run_ground_cmd = [&](CLI::App* cmd, CommonFlags& flags, const std::string& debiased,
                            const std::string& captions, const std::string& matrix,
                            const std::string& out, const std::string& sweep_spec) {
    nlohmann::json doc;
    if (flags.config_path.empty())
      doc = config_to_json(default_config());
    else
      doc = nlohmann::json::parse(read_file(flags.config_path));
    auto extras = cmd->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      std::string key = extras[i];
      if (key.rfind("--", 0) != 0 || i + 1 >= extras.size())
        throw SchemaError("expected --dotted.path VALUE override, got: " + key);
      apply_override(doc, key.substr(2), extras[++i]);
    }
    GroundInputs inputs;
    inputs.debiased_path = debiased;
    inputs.captions_dir = captions;
    if (!matrix.empty()) inputs.matrix_dir = fs::path(matrix);

    auto run_one = [&](const nlohmann::json& one_doc, const std::string& out_path) {
      auto config = config_from_json(one_doc);
      if (!flags.cache_dir.empty()) config.cache_dir = flags.cache_dir;
      if (flags.seed) config.seed = *flags.seed;
      auto records = load_dataset(config.dataset);
      EmbedProvider* embedder = nullptr;
      Providers providers;
      if (!inputs.matrix_dir) {
        providers = make_providers(config, flags.offline);
        embedder = providers.embedder.get();
      }
      run_ground(config, records, inputs, embedder, out_path);
      std::cout << "wrote " << out_path << " (" << records.size() << " queries)\n";
    };

    if (sweep_spec.empty()) {
      run_one(doc, out);
      return;
    }
    auto [key, values] = parse_sweep(sweep_spec);
    fs::path out_path(out);
    std::string stem = (out_path.parent_path() / out_path.stem()).string();
    std::string ext = out_path.extension().string();
    for (const auto& value : values) {
      nlohmann::json swept = doc;
      apply_override(swept, key, value);
      std::string safe_key = key;
      std::replace(safe_key.begin(), safe_key.end(), '/', '_');
      run_one(swept, stem + "." + safe_key + "=" + value + ext);
    }
  };

  if (ground_cmd->parsed()) {
    run_ground_cmd(ground_cmd, ground_flags, ground_debiased, ground_captions, ground_matrix,
                   ground_out, ground_sweep);
    return 0;
  }
  if (sweep_cmd->parsed()) {
    run_ground_cmd(sweep_cmd, sweep_flags, sweep_debiased, sweep_captions, sweep_matrix, sweep_out,
                   sweep_sweep);
    return 0;
  }
  if (export_cmd->parsed()) {
    auto config = export_flags.load(export_cmd);
    auto records = load_dataset(config.dataset);
    auto providers = make_providers(config, export_flags.offline);
    GroundInputs inputs;
    inputs.debiased_path = export_debiased;
    inputs.captions_dir = export_captions;
    run_export_matrix(config, records, inputs, *providers.embedder, export_out);
    std::cout << "wrote matrices under " << export_out << "\n";
    return 0;
  }
  if (eval_cmd->parsed()) {
    auto config = eval_flags.load(eval_cmd);
    auto records = load_dataset(config.dataset);
    EvalOptions options;
    options.iou_grid = parse_grid(eval_grid);
    options.r1_thresholds = parse_thresholds(eval_r1);
    options.strict_iou = eval_strict;
    auto report = run_eval(records, eval_pred, options, eval_out);
    std::cout << report_table(report);
    if (!eval_out.empty()) std::cout << "wrote " << eval_out << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SchemaError& e) {
    std::cerr << "groundline: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "groundline: " << e.what() << "\n";
    return 1;
  }
}
