#include "groundline/gateway.hpp"

#include "groundline/errors.hpp"
#include "groundline/hashing.hpp"
#include "groundline/jsonl.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <random>
#include <regex>
#include <thread>

namespace groundline {

namespace fs = std::filesystem;

void ChatRequest::validate() const {
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0)
    throw std::invalid_argument("ChatRequest: temperature outside [0, 2]");
  const bool has_user = std::any_of(messages.begin(), messages.end(),
                                    [](const ChatMessage& m) { return m.role == "user"; });
  if (!has_user) throw std::invalid_argument("ChatRequest: at least one user message required");
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::debias: return "debias";
    case Stage::caption: return "caption";
    case Stage::embed: return "embed";
  }
  return "unknown";
}

void normalize_unit(std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  const double n = std::sqrt(s);
  if (!(n > 0.0) || !std::isfinite(n)) throw ZeroVector("cannot normalize zero-length vector");
  for (double& v : values) v /= n;
}

namespace {

std::string read_image_bytes(const std::string& path) {
  std::error_code ec;
  if (!fs::exists(path, ec) || fs::is_directory(path, ec))
    throw MissingFrame("frame file missing: " + path);
  auto bytes = read_file(path);
  if (bytes.empty()) throw MissingFrame("frame file empty: " + path);
  return bytes;
}

json chat_request_fingerprint(Stage stage, const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    json jm{{"role", m.role}, {"content", m.content}};
    if (m.image_path) jm["image_sha256"] = sha256_hex(read_image_bytes(*m.image_path));
    messages.push_back(std::move(jm));
  }
  return json{{"stage", stage_name(stage)},
              {"model", req.model_id},
              {"temperature", req.temperature},
              {"messages", std::move(messages)}};
}

}  // namespace

CacheKey CacheKey::for_chat(Stage stage, const ChatRequest& req) {
  return CacheKey{stage, sha256_hex(chat_request_fingerprint(stage, req).dump())};
}

CacheKey CacheKey::for_embed(const std::string& model_id, const std::string& text) {
  const json j{{"stage", "embed"}, {"model", model_id}, {"input", text}};
  return CacheKey{Stage::embed, sha256_hex(j.dump())};
}

ResponseCache::ResponseCache(std::string cache_dir) : cache_dir_(std::move(cache_dir)) {}

std::string ResponseCache::record_path(const CacheKey& key) const {
  return cache_dir_ + "/" + stage_name(key.stage) + "/" + key.content_hash.substr(0, 2) + "/" +
         key.content_hash + ".json";
}

std::optional<std::string> ResponseCache::lookup(const CacheKey& key) const {
  const auto path = record_path(key);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  json record = json::parse(read_file(path), nullptr, false);
  if (record.is_discarded() || !record.contains("response") || !record.contains("checksum"))
    throw CacheCorruption("unreadable cache record: " + path);
  const std::string response = record["response"].dump();
  if (sha256_hex(response) != record["checksum"].get<std::string>())
    throw CacheCorruption("checksum mismatch in cache record: " + path);
  return response;
}

void ResponseCache::store(const CacheKey& key, const std::string& request_summary,
                          const std::string& response) const {
  json record;
  record["key"] = json{{"stage", stage_name(key.stage)}, {"content_hash", key.content_hash}};
  record["request"] = json::parse(request_summary);
  record["response"] = json::parse(response);
  record["checksum"] = sha256_hex(record["response"].dump());
  atomic_write_file(record_path(key), record.dump() + "\n");
}

// ---------------------------------------------------------------------------
// HTTP transport

namespace {

// Runtime-bounded counting gate; std::counting_semaphore fixes the bound at
// compile time.
class BoundedGate {
 public:
  explicit BoundedGate(int slots) : slots_(slots > 0 ? slots : 1) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < slots_; });
    ++in_flight_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
  int in_flight_ = 0;
};

struct GateGuard {
  explicit GateGuard(BoundedGate& g) : gate(g) { gate.acquire(); }
  ~GateGuard() { gate.release(); }
  BoundedGate& gate;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port], what httplib::Client wants
  std::string prefix;  // path prefix, possibly empty
};

ParsedUrl parse_base_url(std::string url) {
  if (url.find("://") == std::string::npos) url = "http://" + url;
  const auto scheme_end = url.find("://") + 3;
  const auto path_start = url.find('/', scheme_end);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  return out;
}

int jittered_delay_ms(const RetryPolicy& policy, int attempt) {
  double delay = policy.base_delay_ms * std::pow(policy.factor, attempt - 1);
  if (policy.jitter) {
    thread_local std::mt19937_64 rng(std::random_device{}());
    std::uniform_real_distribution<double> half(0.5, 1.0);
    delay *= half(rng);
  }
  return static_cast<int>(delay);
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

// Runs `attempt` under the retry policy. The callable throws TransportError
// for retryable failures and anything else for terminal ones.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& attempt) {
  int tries = 0;
  for (;;) {
    ++tries;
    try {
      return attempt();
    } catch (const TransportError&) {
      if (tries >= policy.max_attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(jittered_delay_ms(policy, tries)));
    }
  }
}

json post_json(const HttpProviderConfig& config, const ParsedUrl& url, const std::string& path,
               const json& body) {
  httplib::Client client(url.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(config.timeout_seconds);
  client.set_write_timeout(60);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);
  auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
  if (!res)
    throw TransportError("request to " + url.origin + url.prefix + path + " failed: " +
                         httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    const std::string msg = "HTTP " + std::to_string(res->status) + " from " + path;
    if (retryable_status(res->status)) throw TransportError(msg);
    throw ProviderError(msg + ": " + res->body.substr(0, 200));
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) throw ProviderError("non-JSON response body from " + path);
  return parsed;
}

class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpProviderConfig config)
      : config_(std::move(config)), url_(parse_base_url(config_.base_url)),
        gate_(config_.max_in_flight) {}

  std::string chat(const ChatRequest& req) override {
    req.validate();
    json messages = json::array();
    for (const auto& m : req.messages) {
      if (m.image_path) {
        const auto bytes = read_image_bytes(*m.image_path);
        json parts = json::array();
        parts.push_back(json{{"type", "text"}, {"text", m.content}});
        parts.push_back(json{
            {"type", "image_url"},
            {"image_url", json{{"url", "data:image/jpeg;base64," + base64_encode(bytes)}}}});
        messages.push_back(json{{"role", m.role}, {"content", std::move(parts)}});
      } else {
        messages.push_back(json{{"role", m.role}, {"content", m.content}});
      }
    }
    const json body{{"model", req.model_id},
                    {"messages", std::move(messages)},
                    {"temperature", req.temperature}};
    GateGuard guard(gate_);
    return with_retries(config_.retry, [&] {
      const json response = post_json(config_, url_, "/chat/completions", body);
      if (!response.contains("choices") || !response["choices"].is_array() ||
          response["choices"].empty())
        throw ProviderError("chat response lacks choices");
      const auto& msg = response["choices"][0];
      if (!msg.contains("message") || !msg["message"].contains("content") ||
          !msg["message"]["content"].is_string())
        throw ProviderError("chat response lacks message content");
      return msg["message"]["content"].get<std::string>();
    });
  }

 private:
  HttpProviderConfig config_;
  ParsedUrl url_;
  BoundedGate gate_;
};

class HttpEmbedProvider final : public EmbedProvider {
 public:
  explicit HttpEmbedProvider(HttpProviderConfig config)
      : config_(std::move(config)), url_(parse_base_url(config_.base_url)),
        gate_(config_.max_in_flight) {}

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const std::string& model_id) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t off = 0; off < texts.size();
         off += static_cast<std::size_t>(config_.embed_batch_size)) {
      const std::size_t end =
          std::min(texts.size(), off + static_cast<std::size_t>(config_.embed_batch_size));
      auto batch = embed_batch(
          std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(off),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end)),
          model_id);
      std::move(batch.begin(), batch.end(), std::back_inserter(out));
    }
    return out;
  }

 private:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                           const std::string& model_id) {
    for (const auto& t : texts)
      if (t.empty()) throw std::invalid_argument("embed: empty input text");
    const json body{{"model", model_id}, {"input", texts}};
    GateGuard guard(gate_);
    return with_retries(config_.retry, [&] {
      const json response = post_json(config_, url_, "/embeddings", body);
      if (!response.contains("data") || !response["data"].is_array() ||
          response["data"].size() != texts.size())
        throw ProviderError("embeddings response data count does not match input");
      std::vector<EmbeddingVector> out(texts.size());
      std::size_t positional = 0;
      for (const auto& item : response["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array())
          throw ProviderError("embeddings response item lacks embedding array");
        const std::size_t slot =
            item.contains("index") && item["index"].is_number_unsigned()
                ? item["index"].get<std::size_t>()
                : positional;
        if (slot >= out.size()) throw ProviderError("embeddings response index out of range");
        EmbeddingVector v;
        v.model_id = model_id;
        v.values.reserve(item["embedding"].size());
        for (const auto& x : item["embedding"]) {
          if (!x.is_number()) throw ProviderError("embedding component is not a number");
          v.values.push_back(x.get<double>());
        }
        normalize_unit(v.values);
        out[slot] = std::move(v);
        ++positional;
      }
      for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].values.size() != out[0].values.size())
          throw ProviderError("embeddings response has inconsistent dimensions");
      return out;
    });
  }

  HttpProviderConfig config_;
  ParsedUrl url_;
  BoundedGate gate_;
};

}  // namespace

std::unique_ptr<ChatProvider> make_http_chat_provider(HttpProviderConfig config) {
  return std::make_unique<HttpChatProvider>(std::move(config));
}

std::unique_ptr<EmbedProvider> make_http_embed_provider(HttpProviderConfig config) {
  return std::make_unique<HttpEmbedProvider>(std::move(config));
}

// ---------------------------------------------------------------------------
// Offline doubles

namespace {

const char* kAdjectives[] = {"blue",  "quiet", "bright", "old",    "small", "round",
                             "green", "tall",  "warm",   "narrow", "red",   "pale"};
const char* kNouns[] = {"dog",    "kitchen", "street", "crowd", "river", "screen",
                        "garden", "table",   "stage",  "car",   "field", "window"};
const char* kVerbs[] = {"near", "beside", "under", "above", "facing", "behind"};

std::string synth_sentence(std::uint64_t seed) {
  std::uint64_t state = seed;
  std::string out = "a ";
  out += kAdjectives[splitmix64(state) % std::size(kAdjectives)];
  out += " ";
  out += kNouns[splitmix64(state) % std::size(kNouns)];
  out += " ";
  out += kVerbs[splitmix64(state) % std::size(kVerbs)];
  out += " a ";
  out += kAdjectives[splitmix64(state) % std::size(kAdjectives)];
  out += " ";
  out += kNouns[splitmix64(state) % std::size(kNouns)];
  return out;
}

// Rephrasing templates; {} is replaced by the query text.
const char* kRephraseTemplates[] = {
    "{}",
    "{} as the scene unfolds",
    "put differently, {}",
    "in other words, {}",
    "{} shown on screen",
    "a moment where {}",
    "{} happening in the video",
    "footage of {}",
};

std::string apply_template(const char* tmpl, const std::string& query) {
  std::string t(tmpl);
  const auto pos = t.find("{}");
  t.replace(pos, 2, query);
  return t;
}

class OfflineChatProvider final : public ChatProvider {
 public:
  explicit OfflineChatProvider(OfflineChatOptions options) : options_(options) {}

  std::string chat(const ChatRequest& req) override {
    req.validate();
    const ChatMessage* user = nullptr;
    for (const auto& m : req.messages)
      if (m.role == "user") user = &m;

    if (user->content.find("[image caption]") != std::string::npos)
      return caption_for(*user);

    static const std::regex query_line("Original query: \"((?:[^\"\\\\]|\\\\.)*)\"");
    std::smatch match;
    if (std::regex_search(user->content, match, query_line))
      return rephrasings_for(match[1].str(), parse_item_count(user->content));

    // Generic canned reply, stable per request content.
    return "ok: " + synth_sentence(options_.seed ^ fnv1a64(user->content));
  }

 private:
  static std::size_t parse_item_count(const std::string& prompt) {
    static const std::regex directive("from 1\\. to ([0-9]+)\\.");
    std::smatch match;
    if (std::regex_search(prompt, match, directive)) return std::stoul(match[1].str());
    return 5;
  }

  std::string caption_for(const ChatMessage& message) {
    std::string bytes;
    if (message.image_path)
      bytes = read_image_bytes(*message.image_path);
    else
      bytes = message.content;
    // Fixture frames may embed their intended caption between [[ and ]].
    const auto open = bytes.find("[[");
    const auto close = bytes.find("]]", open == std::string::npos ? 0 : open);
    if (open != std::string::npos && close != std::string::npos && close > open + 2)
      return bytes.substr(open + 2, close - open - 2);
    return synth_sentence(options_.seed ^ fnv1a64(bytes));
  }

  std::string rephrasings_for(const std::string& query, std::size_t n) {
    std::string out;
    const std::uint64_t rotation =
        options_.identity ? 0 : fnv1a64(query) ^ options_.seed;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string item =
          options_.identity
              ? query
              : apply_template(
                    kRephraseTemplates[(rotation + i) % std::size(kRephraseTemplates)], query);
      out += std::to_string(i + 1) + ". " + item + "\n";
    }
    return out;
  }

  OfflineChatOptions options_;
};

class OfflineEmbedProvider final : public EmbedProvider {
 public:
  OfflineEmbedProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const std::string& model_id) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      if (text.empty()) throw std::invalid_argument("embed: empty input text");
      EmbeddingVector v;
      v.model_id = model_id;
      v.values.assign(dim_, 0.0);
      for (const auto& token : tokenize(text)) {
        std::uint64_t state = seed_ * 0x9e3779b97f4a7c15ULL ^ fnv1a64(token);
        for (std::size_t d = 0; d < dim_; ++d) v.values[d] += unit_double(state);
      }
      double norm2 = 0.0;
      for (double x : v.values) norm2 += x * x;
      if (norm2 < 1e-24) v.values[0] = 1.0;  // no usable tokens
      normalize_unit(v.values);
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  static std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      } else if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    if (tokens.empty()) tokens.push_back(text);
    return tokens;
  }

  std::size_t dim_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Replay wrappers

class CachedChatProvider final : public ChatProvider {
 public:
  CachedChatProvider(Stage stage, std::shared_ptr<ChatProvider> inner,
                     std::shared_ptr<ResponseCache> cache)
      : stage_(stage), inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::string chat(const ChatRequest& req) override {
    const auto key = CacheKey::for_chat(stage_, req);
    if (auto hit = cache_->lookup(key)) return json::parse(*hit).get<std::string>();
    if (!inner_)
      throw TransportError("cache miss and no provider configured (stage " +
                           std::string(stage_name(stage_)) + ")");
    const std::string answer = inner_->chat(req);
    cache_->store(key, chat_request_fingerprint(stage_, req).dump(), json(answer).dump());
    return answer;
  }

 private:
  Stage stage_;
  std::shared_ptr<ChatProvider> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

class CachedEmbedProvider final : public EmbedProvider {
 public:
  CachedEmbedProvider(std::shared_ptr<EmbedProvider> inner, std::shared_ptr<ResponseCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const std::string& model_id) override {
    std::vector<EmbeddingVector> out(texts.size());
    // Each distinct text is embedded once; duplicates fan out from one slot.
    std::vector<std::string> misses;
    std::vector<std::size_t> first_slot;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto key = CacheKey::for_embed(model_id, texts[i]);
      if (auto hit = cache_->lookup(key)) {
        EmbeddingVector v;
        v.model_id = model_id;
        v.values = json::parse(*hit).get<std::vector<double>>();
        out[i] = std::move(v);
      } else if (std::find(misses.begin(), misses.end(), texts[i]) == misses.end()) {
        misses.push_back(texts[i]);
        first_slot.push_back(i);
      }
    }
    if (!misses.empty()) {
      if (!inner_) throw TransportError("cache miss and no embedding provider configured");
      auto fresh = inner_->embed(misses, model_id);
      for (std::size_t m = 0; m < misses.size(); ++m) {
        cache_->store(CacheKey::for_embed(model_id, misses[m]),
                      json{{"stage", "embed"}, {"model", model_id}, {"input", misses[m]}}.dump(),
                      json(fresh[m].values).dump());
        out[first_slot[m]] = fresh[m];
      }
      // Fill any remaining duplicates of freshly embedded texts.
      for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!out[i].values.empty()) continue;
        for (std::size_t m = 0; m < misses.size(); ++m)
          if (texts[i] == misses[m]) out[i] = fresh[m];
      }
    }
    std::size_t dim = 0;
    for (const auto& v : out) {
      if (dim == 0) dim = v.values.size();
      if (v.values.size() != dim)
        throw ProviderError("inconsistent embedding dimensions for model " + model_id);
    }
    return out;
  }

 private:
  std::shared_ptr<EmbedProvider> inner_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace

std::unique_ptr<ChatProvider> make_offline_chat_provider(OfflineChatOptions options) {
  return std::make_unique<OfflineChatProvider>(options);
}

std::unique_ptr<EmbedProvider> make_offline_embed_provider(std::size_t dim, std::uint64_t seed) {
  return std::make_unique<OfflineEmbedProvider>(dim, seed);
}

std::unique_ptr<ChatProvider> make_cached_chat_provider(Stage stage,
                                                        std::shared_ptr<ChatProvider> inner,
                                                        std::shared_ptr<ResponseCache> cache) {
  return std::make_unique<CachedChatProvider>(stage, std::move(inner), std::move(cache));
}

std::unique_ptr<EmbedProvider> make_cached_embed_provider(std::shared_ptr<EmbedProvider> inner,
                                                          std::shared_ptr<ResponseCache> cache) {
  return std::make_unique<CachedEmbedProvider>(std::move(inner), std::move(cache));
}

}  // namespace groundline
