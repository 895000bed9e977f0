#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ooro/occlusion.hpp"

namespace ooro {

/// "all": every ordered pair (i, j), i != j. "gt-occluded": only ordered pairs
/// whose unordered pair carries a ground-truth occlusion in either direction.
enum class PairMode { All, GtOccluded };

std::string_view to_string(PairMode mode) noexcept;
std::optional<PairMode> pair_mode_from_string(std::string_view name);

struct SceneEvaluation {
  std::int64_t image_id{0};
  std::size_t n{0};
  std::size_t correct_pairs{0};
  std::size_t total_pairs{0};
  bool all_zero_prediction{false};
  bool comparable{true};

  double accuracy() const { return total_pairs ? double(correct_pairs) / double(total_pairs) : 0.0; }
};

struct EvaluationReport {
  std::string method;
  std::string dataset;
  PairMode pair_mode{PairMode::All};
  double micro_accuracy{0};
  double macro_accuracy{0};
  double all_zero_rate{0};
  std::size_t incomparable_count{0};
  std::vector<SceneEvaluation> per_scene;
};

/// Entry-wise comparison of predicted and ground-truth adjacency. Predictions
/// over a different instance count are marked incomparable.
SceneEvaluation scene_accuracy(const OcclusionRelations& pred, const OcclusionRelations& gt,
                               PairMode mode, std::int64_t image_id = 0);

/// Micro (pair-pooled) and macro (scene-mean) accuracy over comparable scenes.
/// Throws EmptyEvaluation when no comparable scene has a pair to score.
EvaluationReport aggregate(std::vector<SceneEvaluation> evals, std::string method,
                           std::string dataset, PairMode mode);

/// Fraction of comparable scenes whose prediction has no edge at all.
double all_zero_rate(std::span<const SceneEvaluation> evals);

nlohmann::json report_to_json(const EvaluationReport& report);

std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& report);

}  // namespace ooro
