#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace groundline {

struct ChatMessage {
  std::string role;     // "system" or "user"
  std::string content;
  // When set, the transport attaches this file as a base64 data URL
  // content part alongside the text.
  std::optional<std::string> image_path;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;

  void validate() const;  // at least one user message, finite temperature in [0, 2]
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;

  double norm() const;
};

enum class Stage { debias, caption, embed };
const char* stage_name(Stage s);

// Content address of one provider call: stage + hex digest over
// (model_id, prompt-or-text, temperature, stage salt).
struct CacheKey {
  Stage stage;
  std::string content_hash;

  static CacheKey for_chat(Stage stage, const ChatRequest& req);
  static CacheKey for_embed(const std::string& model_id, const std::string& text);
};

// Append-only record store on disk, one checksummed JSON record per key,
// laid out as {cache_dir}/{stage}/{first 2 hex}/{hash}.json.
class ResponseCache {
 public:
  explicit ResponseCache(std::string cache_dir);

  // Returns the stored response, or nullopt on miss. Throws CacheCorruption
  // when a record exists but fails its checksum.
  std::optional<std::string> lookup(const CacheKey& key) const;
  void store(const CacheKey& key, const std::string& request_summary,
             const std::string& response) const;

  const std::string& dir() const { return cache_dir_; }

 private:
  std::string record_path(const CacheKey& key) const;
  std::string cache_dir_;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 1000;
  double factor = 2.0;
  bool jitter = true;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  // First assistant message content for the request.
  virtual std::string chat(const ChatRequest& req) = 0;
};

class EmbedProvider {
 public:
  virtual ~EmbedProvider() = default;
  // One unit-norm vector per input text, order preserving.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                             const std::string& model_id) = 0;
};

struct HttpProviderConfig {
  std::string base_url;              // e.g. http://localhost:8000/v1
  std::string api_key;               // optional bearer token
  RetryPolicy retry;
  int max_in_flight = 4;             // bounded request concurrency
  int timeout_seconds = 300;
  int embed_batch_size = 64;
};

// POST {base_url}/chat/completions, response choices[0].message.content.
std::unique_ptr<ChatProvider> make_http_chat_provider(HttpProviderConfig config);

// POST {base_url}/embeddings, response data[i].embedding.
std::unique_ptr<EmbedProvider> make_http_embed_provider(HttpProviderConfig config);

struct OfflineChatOptions {
  std::uint64_t seed = 0;
  // Identity mode answers a debias prompt with n copies of the original
  // query; otherwise deterministic template rephrasings are produced.
  bool identity = false;
};

// Deterministic chat double: answers debias prompts with a numbered list
// derived from the embedded query, and caption prompts with text derived
// from the attached frame bytes. No network.
std::unique_ptr<ChatProvider> make_offline_chat_provider(OfflineChatOptions options = {});

// Deterministic embed double: a seeded hash of the token multiset spread
// into `dim` dimensions, unit normalized.
std::unique_ptr<EmbedProvider> make_offline_embed_provider(std::size_t dim,
                                                           std::uint64_t seed = 0);

// Replay wrappers: serve from the cache when possible, otherwise delegate
// and store the result before returning. A warm cache answers with zero
// calls on the inner provider.
std::unique_ptr<ChatProvider> make_cached_chat_provider(Stage stage,
                                                        std::shared_ptr<ChatProvider> inner,
                                                        std::shared_ptr<ResponseCache> cache);
std::unique_ptr<EmbedProvider> make_cached_embed_provider(std::shared_ptr<EmbedProvider> inner,
                                                          std::shared_ptr<ResponseCache> cache);

// L2-normalize in place; throws ZeroVector on a zero input.
void normalize_unit(std::vector<double>& values);

}  // namespace groundline
