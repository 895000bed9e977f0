#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ooro/geometry.hpp"

namespace ooro {

struct PromptSpec {
  std::string template_text;
  std::string categories_csv;
  bool include_bboxes{false};
  std::string rendered;
};

/// Template with a `{categories}` slot; the last line is the no-explanations instruction.
extern const std::string_view kOcclusionPromptTemplate;

/// Renders the occlusion prompt. With `include_bboxes`, one "name: [x,y,w,h]"
/// line per entry of `bboxes` goes between the list request and the format
/// instruction. Throws EmptyCategoryList on an empty CSV.
PromptSpec build_prompt(std::string_view categories_csv, bool include_bboxes = false,
                        const std::vector<std::pair<std::string, BBox>>& bboxes = {});

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// SHA-256 over model ‖ "\n" ‖ prompt ‖ "\n" ‖ image digest, lowercase hex.
std::string exchange_cache_key(std::string_view model, std::string_view prompt,
                               std::string_view image_digest);

/// "image/png" or "image/jpeg" from magic bytes; throws InvalidImage otherwise.
std::string_view image_media_type(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);

struct LlmExchange {
  std::string cache_key;
  std::string model_name;
  std::string image_digest;
  std::string prompt;
  std::string response_text;
  std::int64_t timestamp{0};  // UTC seconds
};

/// Append-only JSONL record of exchanges keyed by cache key. Row order in the
/// file does not matter; the first row for a key wins.
class ResponseCache {
 public:
  ResponseCache() = default;

  /// Loads `path` if it exists; later `append` calls write to it.
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  void append(const LlmExchange& exchange);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, std::string> responses_;
  mutable std::shared_mutex mutex_;
};

enum class QueryMode { Replay, Live };

struct LlmConfig {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string api_key;
  QueryMode mode{QueryMode::Replay};
  double temperature{0.0};
  int max_retries{3};
  std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
  std::chrono::seconds timeout{120};
};

struct QueryResult {
  std::string text;
  std::string cache_key;
  bool from_cache{false};
};

/// Chat-completions request body with the image attached as a base64 data URL.
std::string chat_request_body(const LlmConfig& config, std::string_view prompt,
                              std::span<const std::uint8_t> image_bytes);

/// Extracts the assistant text; throws MalformedResponse on empty or non-text payloads.
std::string extract_response_text(std::string_view body);

/// One request per image. Replay mode answers only from the cache and never
/// opens a connection; live mode consults the cache first, then the endpoint.
class LlmClient {
 public:
  LlmClient(LlmConfig config, ResponseCache& cache) : config_(std::move(config)), cache_(cache) {}

  QueryResult query(std::span<const std::uint8_t> image_bytes, const PromptSpec& prompt);

  const LlmConfig& config() const noexcept { return config_; }

 private:
  std::string post_with_retries(const std::string& body);

  LlmConfig config_;
  ResponseCache& cache_;
};

}  // namespace ooro
