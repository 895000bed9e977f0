#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ooro/geometry.hpp"
#include "ooro/occlusion.hpp"

namespace ooro {

/// One annotated object. `display_name` is "<category> <category_index>" and is
/// unique within its scene.
struct InstanceRef {
  std::size_t scene_local_id{0};
  std::string category;
  std::size_t category_index{0};
  std::string display_name;
  BBox bbox;
  std::optional<Segmentation> segmentation;  // modal mask
  bool iscrowd{false};
};

struct Scene {
  std::int64_t image_id{0};
  std::string file_name;
  int width{0};
  int height{0};
  std::vector<InstanceRef> instances;
  OcclusionRelations ground_truth;

  std::size_t size() const noexcept { return instances.size(); }
};

/// Display names in instance order.
using CategoryList = std::vector<std::string>;

struct IngestOptions {
  bool include_crowd{true};
};

/// Scenes in image-list order; one scene per image entry.
std::vector<Scene> load_cocoa(const std::filesystem::path& annotation_file,
                              const IngestOptions& options = {});

struct InstaOrderLoad {
  std::vector<Scene> scenes;
  std::vector<std::int64_t> unmatched_image_ids;  // skipped records
};

/// Joins InstaOrder occlusion records with COCO instance metadata by image id.
/// Depth-order records are discarded.
InstaOrderLoad load_instaorder(const std::filesystem::path& instaorder_file,
                               const std::filesystem::path& coco_file,
                               const IngestOptions& options = {});

/// Numbers every instance within its category in list order, singletons included.
std::vector<InstanceRef> assign_display_names(std::vector<InstanceRef> instances);

/// Lowercased, trimmed, whitespace-collapsed category text.
std::string normalize_category(std::string_view text);

CategoryList category_list(const Scene& scene);

/// Single CSV line of display names, RFC 4180 quoting where needed.
std::string category_csv(const Scene& scene);
std::string join_csv(const std::vector<std::string>& fields);
std::vector<std::string> split_csv(std::string_view line);

/// Splits "clock 1" into ("clock", 1); names without a trailing index give nullopt.
std::optional<std::pair<std::string, std::size_t>> split_display_name(std::string_view name);

/// A scene with only category labels, built from a display-name list.
Scene scene_from_display_names(const CategoryList& names);

/// Normalized scenes JSONL row.
nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path);
void write_scenes_jsonl(const std::filesystem::path& path, const std::vector<Scene>& scenes);

/// Reads and parses a JSON file; FileNotFound or MalformedAnnotation on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Decoded modal mask of one instance, or nullopt when it carries no segmentation.
std::optional<BinaryMask> instance_mask(const Scene& scene, const InstanceRef& inst);

}  // namespace ooro
