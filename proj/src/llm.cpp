#include "ooro/llm.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ooro/error.hpp"

namespace ooro {

using nlohmann::json;

const std::string_view kOcclusionPromptTemplate =
    "List all visible objects stated in these {categories} from foreground to background "
    "starting from index 0.\n"
    "Professionally state object occlusion, return it in this format:\n"
    "\"Object A occludes Object B\"\n"
    "If there are multiple objects in same class, number them (e.g., bottle 0, bottle 1, etc).\n"
    "Return only the ordered list and occlusions -- no explanations.";

namespace {

constexpr std::string_view kSlot = "{categories}";

std::string format_coordinate(double v) {
  char buf[32];
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", v);
  }
  return buf;
}

}  // namespace

PromptSpec build_prompt(std::string_view categories_csv, bool include_bboxes,
                        const std::vector<std::pair<std::string, BBox>>& bboxes) {
  if (categories_csv.empty()) {
    throw Error(ErrorKind::EmptyCategoryList, "prompt needs at least one category");
  }
  PromptSpec spec;
  spec.template_text = std::string(kOcclusionPromptTemplate);
  spec.categories_csv = std::string(categories_csv);
  spec.include_bboxes = include_bboxes;

  std::string rendered = spec.template_text;
  rendered.replace(rendered.find(kSlot), kSlot.size(), categories_csv);
  if (include_bboxes && !bboxes.empty()) {
    std::string lines;
    for (const auto& [name, b] : bboxes) {
      lines += name + ": [" + format_coordinate(b.x) + "," + format_coordinate(b.y) + "," +
               format_coordinate(b.w) + "," + format_coordinate(b.h) + "]\n";
    }
    rendered.insert(rendered.find('\n') + 1, lines);
  }
  spec.rendered = std::move(rendered);
  return spec;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (const unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string exchange_cache_key(std::string_view model, std::string_view prompt,
                               std::string_view image_digest) {
  std::string material;
  material.reserve(model.size() + prompt.size() + image_digest.size() + 2);
  material.append(model).append("\n").append(prompt).append("\n").append(image_digest);
  return sha256_hex(material);
}

std::string_view image_media_type(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() >= sizeof kPng && std::equal(std::begin(kPng), std::end(kPng), bytes.begin())) {
    return "image/png";
  }
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    return "image/jpeg";
  }
  throw Error(ErrorKind::InvalidImage, "not a PNG or JPEG image");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                      int(bytes.size()));
  out.resize(std::size_t(written));
  return out;
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json row = json::parse(line);
      responses_.emplace(row.at("key").get<std::string>(), row.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedAnnotation,
                  path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto it = responses_.find(key);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(const LlmExchange& exchange) {
  std::unique_lock lock(mutex_);
  if (!responses_.emplace(exchange.cache_key, exchange.response_text).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot append to " + path_.string());
  const json row = {{"key", exchange.cache_key},       {"model", exchange.model_name},
                    {"image_digest", exchange.image_digest}, {"prompt", exchange.prompt},
                    {"response", exchange.response_text},    {"ts", exchange.timestamp}};
  out << row.dump() << '\n';
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return responses_.size();
}

std::string chat_request_body(const LlmConfig& config, std::string_view prompt,
                              std::span<const std::uint8_t> image_bytes) {
  const std::string data_url = "data:" + std::string(image_media_type(image_bytes)) +
                               ";base64," + base64_encode(image_bytes);
  const json body = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"messages",
       {{{"role", "user"},
         {"content",
          {{{"type", "text"}, {"text", prompt}},
           {{"type", "image_url"}, {"image_url", {{"url", data_url}}}}}}}}}};
  return body.dump();
}

std::string extract_response_text(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("response is not JSON: ") + e.what());
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorKind::MalformedResponse, "no choices in response");
  }
  const json& message = (*choices)[0].value("message", json::object());
  const auto content = message.find("content");
  std::string text;
  if (content != message.end() && content->is_string()) {
    text = content->get<std::string>();
  } else if (content != message.end() && content->is_array()) {
    for (const auto& part : *content) {
      if (part.value("type", "") == "text" && part.contains("text") && part["text"].is_string()) {
        text += part["text"].get<std::string>();
      }
    }
  } else {
    throw Error(ErrorKind::MalformedResponse, "message has no text content");
  }
  if (text.empty()) throw Error(ErrorKind::MalformedResponse, "empty response text");
  return text;
}

QueryResult LlmClient::query(std::span<const std::uint8_t> image_bytes, const PromptSpec& prompt) {
  image_media_type(image_bytes);
  const std::string image_digest = sha256_hex(image_bytes);
  QueryResult result;
  result.cache_key = exchange_cache_key(config_.model, prompt.rendered, image_digest);
  if (auto cached = cache_.lookup(result.cache_key)) {
    result.text = std::move(*cached);
    result.from_cache = true;
    return result;
  }
  if (config_.mode == QueryMode::Replay) {
    throw Error(ErrorKind::CacheMiss, "no recorded response for key " + result.cache_key);
  }

  result.text = extract_response_text(
      post_with_retries(chat_request_body(config_, prompt.rendered, image_bytes)));

  LlmExchange exchange;
  exchange.cache_key = result.cache_key;
  exchange.model_name = config_.model;
  exchange.image_digest = image_digest;
  exchange.prompt = prompt.rendered;
  exchange.response_text = result.text;
  exchange.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
  cache_.append(exchange);
  return result;
}

std::string LlmClient::post_with_retries(const std::string& body) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw Error(ErrorKind::Usage, "unsupported endpoint URL '" + config_.endpoint + "'");
  }
  std::string origin = m[1].str() + "://" + m[2].str();
  if (m[3].matched) origin += ":" + m[3].str();
  const std::string path = m[4].matched ? m[4].str() : "/";

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.initial_backoff * (1 << (attempt - 1)));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    if (res->status == 429) {
      int retry_after = 0;
      if (res->has_header("Retry-After")) {
        try {
          retry_after = std::stoi(res->get_header_value("Retry-After"));
        } catch (const std::exception&) {
        }
      }
      throw RateLimitedError("endpoint returned 429", retry_after);
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  throw Error(ErrorKind::TransportError, config_.endpoint + ": " + last_error);
}

}  // namespace ooro
