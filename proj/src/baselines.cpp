#include "ooro/baselines.hpp"

#include "ooro/error.hpp"

namespace ooro {

std::string_view to_string(BaselineKind kind) noexcept {
  switch (kind) {
    case BaselineKind::Area: return "area";
    case BaselineKind::YAxis: return "yaxis";
    case BaselineKind::BBBD: return "bbbd";
  }
  return "unknown";
}

std::optional<BaselineKind> baseline_from_string(std::string_view name) {
  if (name == "area") return BaselineKind::Area;
  if (name == "yaxis") return BaselineKind::YAxis;
  if (name == "bbbd") return BaselineKind::BBBD;
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const Scene& scene) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const auto& inst = scene.instances;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (std::size_t j = i + 1; j < inst.size(); ++j) {
      if (bbox_intersection(inst[i].bbox, inst[j].bbox)) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

OcclusionRelations predict_area(const Scene& scene) {
  OcclusionRelations r(scene.size());
  for (const auto& [i, j] : candidate_pairs(scene)) {
    const double ai = scene.instances[i].bbox.area();
    const double aj = scene.instances[j].bbox.area();
    if (aj > ai) {
      r.set_occludes(j, i);
    } else {
      r.set_occludes(i, j);
    }
  }
  return r;
}

OcclusionRelations predict_yaxis(const Scene& scene) {
  OcclusionRelations r(scene.size());
  for (const auto& [i, j] : candidate_pairs(scene)) {
    const BBox& bi = scene.instances[i].bbox;
    const BBox& bj = scene.instances[j].bbox;
    bool j_wins = false;
    if (bj.bottom() != bi.bottom()) {
      j_wins = bj.bottom() > bi.bottom();
    } else {
      j_wins = bj.area() > bi.area();
    }
    if (j_wins) {
      r.set_occludes(j, i);
    } else {
      r.set_occludes(i, j);
    }
  }
  return r;
}

std::vector<std::size_t> instances_missing_masks(const Scene& scene) {
  std::vector<std::size_t> missing;
  for (std::size_t k = 0; k < scene.size(); ++k) {
    if (!scene.instances[k].segmentation) missing.push_back(k);
  }
  return missing;
}

OcclusionRelations predict_bbbd(const Scene& scene) {
  OcclusionRelations r(scene.size());
  const auto pairs = candidate_pairs(scene);
  if (pairs.empty()) return r;

  const auto missing = instances_missing_masks(scene);
  if (missing.size() == scene.size()) {
    std::string names;
    for (const auto k : missing) {
      if (!names.empty()) names += ", ";
      names += scene.instances[k].display_name;
    }
    throw Error(ErrorKind::MissingMask,
                "image " + std::to_string(scene.image_id) + " has no modal masks: " + names);
  }

  // Decode each mask at most once per scene.
  std::vector<std::optional<BinaryMask>> masks(scene.size());
  std::vector<bool> decoded(scene.size(), false);
  const auto mask_of = [&](std::size_t k) -> const std::optional<BinaryMask>& {
    if (!decoded[k]) {
      masks[k] = instance_mask(scene, scene.instances[k]);
      decoded[k] = true;
    }
    return masks[k];
  };

  for (const auto& [i, j] : pairs) {
    const auto region = bbox_intersection(scene.instances[i].bbox, scene.instances[j].bbox);
    if (!region) continue;
    const auto& mi = mask_of(i);
    const auto& mj = mask_of(j);
    if (!mi || !mj) continue;
    const auto ci = count_in_region(*mi, *region);
    const auto cj = count_in_region(*mj, *region);
    if (ci > cj) {
      r.set_occludes(i, j);
    } else if (cj > ci) {
      r.set_occludes(j, i);
    }
  }
  return r;
}

OcclusionRelations predict(BaselineKind kind, const Scene& scene) {
  switch (kind) {
    case BaselineKind::Area: return predict_area(scene);
    case BaselineKind::YAxis: return predict_yaxis(scene);
    case BaselineKind::BBBD: return predict_bbbd(scene);
  }
  return OcclusionRelations(scene.size());
}

}  // namespace ooro
