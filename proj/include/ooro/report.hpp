#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ooro/annotations.hpp"
#include "ooro/occlusion.hpp"

namespace ooro {

/// One scene's prediction as stored in a predictions JSONL file.
struct PredictionRecord {
  std::int64_t image_id{0};
  std::string method;
  SignedOrderMatrix matrix;

  bool all_zero{true};
  std::optional<std::string> error;  // per-scene failure, e.g. "CacheMiss: ..."

  // LLM method only.
  std::vector<std::string> unmatched_labels;
  std::size_t ignored_lines{0};
  bool sequence_mismatch{false};
  std::string model;
  std::string cache_key;
  double temperature{0};

  // BBBD only.
  std::vector<std::string> missing_masks;
};

bool is_llm_method(const std::string& method);

nlohmann::json prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& j);

std::vector<PredictionRecord> read_predictions_jsonl(const std::filesystem::path& path);
void write_predictions_jsonl(const std::filesystem::path& path,
                             const std::vector<PredictionRecord>& records);

/// Graphviz digraph: one node per instance labeled by display name, in instance
/// order, and one occluder -> occludee edge per relation.
std::string export_dot(const OcclusionRelations& relations, const Scene& scene);
std::string export_dot(const PredictionRecord& record, const Scene& scene);

/// Runs `ooro <args...>` (args exclude the program name). Returns the exit code:
/// 0 ok, 2 usage or input error, 3 replay misconfiguration.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ooro
