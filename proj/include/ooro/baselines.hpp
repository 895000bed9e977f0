#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "ooro/annotations.hpp"
#include "ooro/occlusion.hpp"

namespace ooro {

enum class BaselineKind { Area, YAxis, BBBD };

std::string_view to_string(BaselineKind kind) noexcept;
std::optional<BaselineKind> baseline_from_string(std::string_view name);

/// Unordered pairs (i < j) whose boxes overlap with positive area. Baselines
/// assert relations only on these pairs.
std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const Scene& scene);

/// Larger box area occludes; ties go to the lower index.
OcclusionRelations predict_area(const Scene& scene);

/// Larger box bottom (y + h) occludes; ties by larger area, then lower index.
OcclusionRelations predict_yaxis(const Scene& scene);

/// Within the box intersection, the instance with more modal-mask pixels
/// occludes. Equal counts, empty regions and missing masks assert nothing.
/// Throws MissingMask when a scene with candidate pairs has no masks at all.
OcclusionRelations predict_bbbd(const Scene& scene);

/// Indices of instances without a modal mask.
std::vector<std::size_t> instances_missing_masks(const Scene& scene);

OcclusionRelations predict(BaselineKind kind, const Scene& scene);

}  // namespace ooro
