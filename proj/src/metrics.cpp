#include "ooro/metrics.hpp"

#include <cstdio>

#include "ooro/annotations.hpp"
#include "ooro/error.hpp"

namespace ooro {

std::string_view to_string(PairMode mode) noexcept {
  return mode == PairMode::All ? "all" : "gt-occluded";
}

std::optional<PairMode> pair_mode_from_string(std::string_view name) {
  if (name == "all") return PairMode::All;
  if (name == "gt-occluded") return PairMode::GtOccluded;
  return std::nullopt;
}

SceneEvaluation scene_accuracy(const OcclusionRelations& pred, const OcclusionRelations& gt,
                               PairMode mode, std::int64_t image_id) {
  SceneEvaluation ev;
  ev.image_id = image_id;
  ev.n = gt.n();
  ev.all_zero_prediction = is_all_zero(pred);
  if (pred.n() != gt.n()) {
    ev.comparable = false;
    return ev;
  }
  const auto& p = pred.adjacency();
  const auto& g = gt.adjacency();
  OcclusionRelations::Adjacency in_scope = OcclusionRelations::Adjacency::Ones(g.rows(), g.cols());
  if (mode == PairMode::GtOccluded) in_scope = g || g.transpose();
  in_scope.matrix().diagonal().setConstant(false);
  ev.total_pairs = std::size_t(in_scope.count());
  ev.correct_pairs = std::size_t((in_scope && (p == g)).count());
  return ev;
}

double all_zero_rate(std::span<const SceneEvaluation> evals) {
  std::size_t comparable = 0, zero = 0;
  for (const auto& ev : evals) {
    if (!ev.comparable) continue;
    ++comparable;
    if (ev.all_zero_prediction) ++zero;
  }
  return comparable ? double(zero) / double(comparable) : 0.0;
}

EvaluationReport aggregate(std::vector<SceneEvaluation> evals, std::string method,
                           std::string dataset, PairMode mode) {
  EvaluationReport report;
  report.method = std::move(method);
  report.dataset = std::move(dataset);
  report.pair_mode = mode;

  std::size_t correct = 0, total = 0, scored = 0;
  double accuracy_sum = 0;
  for (const auto& ev : evals) {
    if (!ev.comparable) {
      ++report.incomparable_count;
      continue;
    }
    correct += ev.correct_pairs;
    total += ev.total_pairs;
    if (ev.total_pairs > 0) {
      ++scored;
      accuracy_sum += ev.accuracy();
    }
  }
  if (scored == 0) {
    throw Error(ErrorKind::EmptyEvaluation,
                "no comparable scene with pairs among " + std::to_string(evals.size()));
  }
  report.micro_accuracy = double(correct) / double(total);
  report.macro_accuracy = accuracy_sum / double(scored);
  report.all_zero_rate = all_zero_rate(evals);
  report.per_scene = std::move(evals);
  return report;
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json per_scene = nlohmann::json::array();
  for (const auto& ev : report.per_scene) {
    per_scene.push_back({{"image_id", ev.image_id},
                         {"n", ev.n},
                         {"correct_pairs", ev.correct_pairs},
                         {"total_pairs", ev.total_pairs},
                         {"all_zero_prediction", ev.all_zero_prediction},
                         {"comparable", ev.comparable}});
  }
  return {{"method", report.method},
          {"dataset", report.dataset},
          {"pair_mode", to_string(report.pair_mode)},
          {"micro_accuracy", report.micro_accuracy},
          {"macro_accuracy", report.macro_accuracy},
          {"all_zero_rate", report.all_zero_rate},
          {"incomparable_count", report.incomparable_count},
          {"per_scene", std::move(per_scene)}};
}

std::string report_csv_header() {
  return "method,dataset,pair_mode,micro,macro,all_zero_rate,incomparable";
}

std::string report_csv_row(const EvaluationReport& report) {
  char numbers[96];
  std::snprintf(numbers, sizeof numbers, "%.6f,%.6f,%.6f,%zu", report.micro_accuracy,
                report.macro_accuracy, report.all_zero_rate, report.incomparable_count);
  return join_csv({report.method, report.dataset, std::string(to_string(report.pair_mode))}) + "," +
         numbers;
}

}  // namespace ooro
