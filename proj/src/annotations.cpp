#include "ooro/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "ooro/error.hpp"

namespace ooro {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::MalformedAnnotation, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T require_as(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    malformed(where + "." + key, "wrong type");
  }
}

std::vector<double> number_list(const json& arr, const std::string& where) {
  if (!arr.is_array()) malformed(where, "expected a number list");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) malformed(where, "expected a number list");
    out.push_back(v.get<double>());
  }
  return out;
}

Segmentation parse_segmentation(const json& seg, const std::string& where) {
  if (seg.is_array()) {
    PolygonSegmentation poly;
    if (!seg.empty() && seg.front().is_number()) {
      poly.parts.push_back(number_list(seg, where));
    } else {
      for (std::size_t k = 0; k < seg.size(); ++k) {
        poly.parts.push_back(number_list(seg[k], where + "[" + std::to_string(k) + "]"));
      }
    }
    return poly;
  }
  if (seg.is_object()) {
    const json& size = require(seg, "size", where);
    if (!size.is_array() || size.size() != 2) malformed(where + ".size", "expected [h, w]");
    RleSegmentation rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    const json& counts = require(seg, "counts", where);
    if (counts.is_string()) {
      rle.counts = counts.get<std::string>();
    } else if (counts.is_array()) {
      std::vector<std::uint32_t> runs;
      runs.reserve(counts.size());
      for (const auto& c : counts) {
        if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
          malformed(where + ".counts", "expected non-negative integers");
        }
        runs.push_back(c.get<std::uint32_t>());
      }
      rle.counts = std::move(runs);
    } else {
      malformed(where + ".counts", "expected string or integer list");
    }
    return rle;
  }
  malformed(where, "unsupported segmentation form");
}

json segmentation_to_json(const Segmentation& seg) {
  if (const auto* poly = std::get_if<PolygonSegmentation>(&seg)) return poly->parts;
  const auto& rle = std::get<RleSegmentation>(seg);
  json out = {{"size", {rle.height, rle.width}}};
  std::visit([&](const auto& c) { out["counts"] = c; }, rle.counts);
  return out;
}

BBox parse_bbox(const json& b, const std::string& where) {
  const auto v = number_list(b, where);
  if (v.size() != 4) malformed(where, "expected [x, y, w, h]");
  if (v[2] < 0 || v[3] < 0) malformed(where, "negative box size");
  return BBox{v[0], v[1], v[2], v[3]};
}

struct ImageInfo {
  std::int64_t id{0};
  std::string file_name;
  int width{0};
  int height{0};
};

std::vector<ImageInfo> parse_images(const json& root) {
  const json& images = require(root, "images", "$");
  if (!images.is_array()) malformed("$.images", "expected an array");
  std::vector<ImageInfo> out;
  out.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    const std::string where = "images[" + std::to_string(k) + "]";
    ImageInfo info;
    info.id = require_as<std::int64_t>(images[k], "id", where);
    info.file_name = images[k].value("file_name", std::string{});
    info.width = require_as<int>(images[k], "width", where);
    info.height = require_as<int>(images[k], "height", where);
    if (info.width <= 0 || info.height <= 0) malformed(where, "non-positive image size");
    out.push_back(std::move(info));
  }
  return out;
}

std::size_t parse_index(std::string_view text, const std::string& where) {
  std::size_t start = 0, end = text.size();
  while (start < end && std::isspace(static_cast<unsigned char>(text[start]))) ++start;
  while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  if (start == end) malformed(where, "empty index");
  std::size_t value = 0;
  for (std::size_t k = start; k < end; ++k) {
    if (!std::isdigit(static_cast<unsigned char>(text[k]))) {
      malformed(where, "bad index '" + std::string(text) + "'");
    }
    value = value * 10 + std::size_t(text[k] - '0');
  }
  return value;
}

void check_reference(std::size_t idx, std::size_t n, const std::string& where) {
  if (idx >= n) {
    throw Error(ErrorKind::DanglingReference,
                where + ": instance " + std::to_string(idx) + " not in scene of " +
                    std::to_string(n) + " instances");
  }
}

// Shared tail of both loaders: clamp boxes, number instances, drop crowd
// instances when asked.
Scene finish_scene(Scene scene, const IngestOptions& options) {
  for (auto& inst : scene.instances) {
    inst.bbox = clamp_box(inst.bbox, double(scene.width), double(scene.height));
  }
  if (!options.include_crowd) {
    std::vector<std::size_t> keep;
    std::vector<InstanceRef> kept;
    for (std::size_t k = 0; k < scene.instances.size(); ++k) {
      if (!scene.instances[k].iscrowd) {
        keep.push_back(k);
        kept.push_back(scene.instances[k]);
      }
    }
    scene.ground_truth = scene.ground_truth.subset(keep);
    scene.instances = std::move(kept);
  }
  scene.instances = assign_display_names(std::move(scene.instances));
  return scene;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedAnnotation, path.string() + ": " + e.what());
  }
}

// COCOA stores one annotation per image with a "regions" list and a
// "depth_constraint" string of 1-based "a-b" pairs meaning region a occludes b.
// A region's modal mask is its "visible_mask" when present, otherwise its
// polygon (unoccluded regions have identical modal and amodal masks).
std::vector<Scene> load_cocoa(const std::filesystem::path& annotation_file,
                              const IngestOptions& options) {
  const json root = read_json_file(annotation_file);
  const auto images = parse_images(root);

  std::vector<Scene> scenes;
  scenes.reserve(images.size());
  std::unordered_map<std::int64_t, std::size_t> by_id;
  for (const auto& info : images) {
    if (!by_id.emplace(info.id, scenes.size()).second) {
      malformed("images", "duplicate image id " + std::to_string(info.id));
    }
    Scene s;
    s.image_id = info.id;
    s.file_name = info.file_name;
    s.width = info.width;
    s.height = info.height;
    scenes.push_back(std::move(s));
  }

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges(scenes.size());
  const json& annotations = require(root, "annotations", "$");
  if (!annotations.is_array()) malformed("$.annotations", "expected an array");
  for (std::size_t a = 0; a < annotations.size(); ++a) {
    const std::string where = "annotations[" + std::to_string(a) + "]";
    const json& ann = annotations[a];
    const auto image_id = require_as<std::int64_t>(ann, "image_id", where);
    const auto it = by_id.find(image_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::DanglingReference,
                  where + ": unknown image_id " + std::to_string(image_id));
    }
    Scene& scene = scenes[it->second];
    const std::size_t offset = scene.instances.size();

    const json& regions = require(ann, "regions", where);
    if (!regions.is_array()) malformed(where + ".regions", "expected an array");
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const std::string rwhere = where + ".regions[" + std::to_string(r) + "]";
      const json& region = regions[r];
      InstanceRef inst;
      inst.category = normalize_category(require_as<std::string>(region, "name", rwhere));
      if (inst.category.empty()) malformed(rwhere + ".name", "empty category");
      const Segmentation amodal =
          parse_segmentation(require(region, "segmentation", rwhere), rwhere + ".segmentation");
      if (const auto vm = region.find("visible_mask"); vm != region.end() && !vm->is_null()) {
        inst.segmentation = parse_segmentation(*vm, rwhere + ".visible_mask");
      } else {
        inst.segmentation = amodal;
      }
      if (const auto b = region.find("bbox"); b != region.end()) {
        inst.bbox = parse_bbox(*b, rwhere + ".bbox");
      } else {
        inst.bbox = segmentation_bbox(*inst.segmentation);
        // Fully occluded regions have an empty modal mask; fall back to the amodal extent.
        if (inst.bbox.area() <= 0) inst.bbox = segmentation_bbox(amodal);
      }
      inst.scene_local_id = scene.instances.size();
      scene.instances.push_back(std::move(inst));
    }

    const std::string constraint = ann.value("depth_constraint", std::string{});
    std::stringstream ss(constraint);
    std::string item;
    std::size_t k = 0;
    while (std::getline(ss, item, ',')) {
      const std::string cwhere = where + ".depth_constraint[" + std::to_string(k++) + "]";
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      const auto dash = item.find('-');
      if (dash == std::string::npos) malformed(cwhere, "expected 'a-b', got '" + item + "'");
      const std::size_t occluder = parse_index(std::string_view(item).substr(0, dash), cwhere);
      const std::size_t occludee = parse_index(std::string_view(item).substr(dash + 1), cwhere);
      const std::size_t count = regions.size();
      if (occluder == 0 || occludee == 0) {
        throw Error(ErrorKind::DanglingReference, cwhere + ": region indices are 1-based");
      }
      check_reference(occluder - 1, count, cwhere);
      check_reference(occludee - 1, count, cwhere);
      if (occluder == occludee) malformed(cwhere, "self-occlusion record");
      edges[it->second].emplace_back(offset + occluder - 1, offset + occludee - 1);
    }
  }

  for (std::size_t s = 0; s < scenes.size(); ++s) {
    scenes[s].ground_truth = OcclusionRelations(scenes[s].instances.size());
    for (const auto& [i, j] : edges[s]) scenes[s].ground_truth.set_occludes(i, j);
    scenes[s] = finish_scene(std::move(scenes[s]), options);
  }
  return scenes;
}

// InstaOrder records list COCO annotation ids in "instance_ids"; occlusion
// "order" strings index into that list: "a < b" means a occludes b, "a > b" the
// reverse, and "a & b" a bidirectional occlusion.
InstaOrderLoad load_instaorder(const std::filesystem::path& instaorder_file,
                               const std::filesystem::path& coco_file,
                               const IngestOptions& options) {
  const json insta = read_json_file(instaorder_file);
  const json coco = read_json_file(coco_file);

  std::unordered_map<std::int64_t, ImageInfo> images;
  for (auto& info : parse_images(coco)) images.emplace(info.id, std::move(info));

  std::unordered_map<std::int64_t, std::string> categories;
  const json& cats = require(coco, "categories", "$");
  for (std::size_t k = 0; k < cats.size(); ++k) {
    const std::string where = "categories[" + std::to_string(k) + "]";
    categories.emplace(require_as<std::int64_t>(cats[k], "id", where),
                       normalize_category(require_as<std::string>(cats[k], "name", where)));
  }

  std::unordered_map<std::int64_t, const json*> coco_anns;
  const json& anns = require(coco, "annotations", "$");
  if (!anns.is_array()) malformed("$.annotations", "expected an array");
  for (std::size_t k = 0; k < anns.size(); ++k) {
    const auto id = require_as<std::int64_t>(anns[k], "id", "annotations[" + std::to_string(k) + "]");
    coco_anns.emplace(id, &anns[k]);
  }

  InstaOrderLoad out;
  const json& records = require(insta, "annotations", "$");
  if (!records.is_array()) malformed("$.annotations", "expected an array");
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::string where = "annotations[" + std::to_string(r) + "]";
    const json& rec = records[r];
    const auto image_id = require_as<std::int64_t>(rec, "image_id", where);
    const auto img = images.find(image_id);
    if (img == images.end()) {
      out.unmatched_image_ids.push_back(image_id);
      continue;
    }

    Scene scene;
    scene.image_id = image_id;
    scene.file_name = img->second.file_name;
    scene.width = img->second.width;
    scene.height = img->second.height;

    const json& ids = require(rec, "instance_ids", where);
    if (!ids.is_array()) malformed(where + ".instance_ids", "expected an array");
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::string iwhere = where + ".instance_ids[" + std::to_string(k) + "]";
      const auto ann_id = ids[k].get<std::int64_t>();
      const auto found = coco_anns.find(ann_id);
      if (found == coco_anns.end()) {
        throw Error(ErrorKind::DanglingReference,
                    iwhere + ": COCO annotation " + std::to_string(ann_id) + " not found");
      }
      const json& ann = *found->second;
      const std::string awhere = "coco annotation " + std::to_string(ann_id);
      if (require_as<std::int64_t>(ann, "image_id", awhere) != image_id) {
        throw Error(ErrorKind::DanglingReference, iwhere + ": annotation belongs to another image");
      }
      const auto cat = categories.find(require_as<std::int64_t>(ann, "category_id", awhere));
      if (cat == categories.end()) {
        throw Error(ErrorKind::DanglingReference, awhere + ": unknown category_id");
      }
      InstanceRef inst;
      inst.scene_local_id = k;
      inst.category = cat->second;
      inst.bbox = parse_bbox(require(ann, "bbox", awhere), awhere + ".bbox");
      inst.iscrowd = ann.value("iscrowd", 0) != 0;
      if (const auto seg = ann.find("segmentation"); seg != ann.end() && !seg->is_null()) {
        inst.segmentation = parse_segmentation(*seg, awhere + ".segmentation");
      }
      scene.instances.push_back(std::move(inst));
    }

    scene.ground_truth = OcclusionRelations(scene.instances.size());
    const json& occlusion = require(rec, "occlusion", where);
    if (!occlusion.is_array()) malformed(where + ".occlusion", "expected an array");
    for (std::size_t k = 0; k < occlusion.size(); ++k) {
      const std::string owhere = where + ".occlusion[" + std::to_string(k) + "]";
      const std::string order = require_as<std::string>(occlusion[k], "order", owhere);
      const auto op = order.find_first_of("<>&");
      if (op == std::string::npos) malformed(owhere, "expected 'a < b', got '" + order + "'");
      const std::size_t a = parse_index(std::string_view(order).substr(0, op), owhere);
      const std::size_t b = parse_index(std::string_view(order).substr(op + 1), owhere);
      check_reference(a, scene.instances.size(), owhere);
      check_reference(b, scene.instances.size(), owhere);
      if (a == b) malformed(owhere, "self-occlusion record");
      switch (order[op]) {
        case '<': scene.ground_truth.set_occludes(a, b); break;
        case '>': scene.ground_truth.set_occludes(b, a); break;
        default:
          scene.ground_truth.set_occludes(a, b);
          scene.ground_truth.set_occludes(b, a);
      }
    }
    out.scenes.push_back(finish_scene(std::move(scene), options));
  }
  return out;
}

std::vector<InstanceRef> assign_display_names(std::vector<InstanceRef> instances) {
  std::map<std::string, std::size_t> next;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    auto& inst = instances[k];
    inst.scene_local_id = k;
    inst.category_index = next[inst.category]++;
    inst.display_name = inst.category + " " + std::to_string(inst.category_index);
  }
  return instances;
}

std::string normalize_category(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(char(std::tolower(c)));
  }
  return out;
}

CategoryList category_list(const Scene& scene) {
  CategoryList names;
  names.reserve(scene.instances.size());
  for (const auto& inst : scene.instances) names.push_back(inst.display_name);
  return names;
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out.push_back(',');
    const auto& f = fields[k];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out.push_back('"');
    for (const char c : f) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  }
  return out;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  if (line.empty()) return fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string category_csv(const Scene& scene) { return join_csv(category_list(scene)); }

std::optional<std::pair<std::string, std::size_t>> split_display_name(std::string_view name) {
  const auto space = name.rfind(' ');
  if (space == std::string_view::npos || space + 1 == name.size()) return std::nullopt;
  const auto digits = name.substr(space + 1);
  if (!std::all_of(digits.begin(), digits.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  if (digits.size() > 9) return std::nullopt;
  return std::make_pair(std::string(name.substr(0, space)), std::size_t(std::stoul(std::string(digits))));
}

Scene scene_from_display_names(const CategoryList& names) {
  Scene scene;
  for (std::size_t k = 0; k < names.size(); ++k) {
    InstanceRef inst;
    inst.scene_local_id = k;
    const std::string norm = normalize_category(names[k]);
    if (const auto split = split_display_name(norm)) {
      inst.category = split->first;
      inst.category_index = split->second;
    } else {
      inst.category = norm;
    }
    inst.display_name = norm;
    scene.instances.push_back(std::move(inst));
  }
  scene.ground_truth = OcclusionRelations(names.size());
  return scene;
}

json scene_to_json(const Scene& scene) {
  json instances = json::array();
  for (const auto& inst : scene.instances) {
    json j = {{"category", inst.category},
              {"category_index", inst.category_index},
              {"display_name", inst.display_name},
              {"bbox", {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h}},
              {"segmentation", inst.segmentation ? segmentation_to_json(*inst.segmentation) : json()}};
    if (inst.iscrowd) j["iscrowd"] = 1;
    instances.push_back(std::move(j));
  }
  return {{"image_id", scene.image_id},
          {"file_name", scene.file_name},
          {"width", scene.width},
          {"height", scene.height},
          {"instances", std::move(instances)},
          {"gt_signed", signed_to_json(to_signed(scene.ground_truth))}};
}

Scene scene_from_json(const json& j) {
  const std::string where = "scene";
  Scene scene;
  scene.image_id = require_as<std::int64_t>(j, "image_id", where);
  scene.file_name = j.value("file_name", std::string{});
  scene.width = require_as<int>(j, "width", where);
  scene.height = require_as<int>(j, "height", where);
  const json& instances = require(j, "instances", where);
  if (!instances.is_array()) malformed(where + ".instances", "expected an array");
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const std::string iwhere = where + ".instances[" + std::to_string(k) + "]";
    const json& ij = instances[k];
    InstanceRef inst;
    inst.scene_local_id = k;
    inst.category = require_as<std::string>(ij, "category", iwhere);
    inst.category_index = require_as<std::size_t>(ij, "category_index", iwhere);
    inst.display_name = require_as<std::string>(ij, "display_name", iwhere);
    inst.bbox = parse_bbox(require(ij, "bbox", iwhere), iwhere + ".bbox");
    inst.iscrowd = ij.value("iscrowd", 0) != 0;
    if (const auto seg = ij.find("segmentation"); seg != ij.end() && !seg->is_null()) {
      inst.segmentation = parse_segmentation(*seg, iwhere + ".segmentation");
    }
    scene.instances.push_back(std::move(inst));
  }
  try {
    scene.ground_truth = from_signed(signed_from_json(require(j, "gt_signed", where)));
  } catch (const Error& e) {
    malformed(where + ".gt_signed", e.what());
  }
  if (scene.ground_truth.n() != scene.instances.size()) {
    malformed(where + ".gt_signed", "matrix size does not match instance count");
  }
  return scene;
}

std::vector<Scene> read_scenes_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::vector<Scene> scenes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      scenes.push_back(scene_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      malformed(path.string() + ":" + std::to_string(lineno), e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return scenes;
}

void write_scenes_jsonl(const std::filesystem::path& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileNotFound, "cannot write " + path.string());
  for (const auto& scene : scenes) out << scene_to_json(scene).dump() << '\n';
}

std::optional<BinaryMask> instance_mask(const Scene& scene, const InstanceRef& inst) {
  if (!inst.segmentation) return std::nullopt;
  return decode_segmentation(*inst.segmentation, scene.height, scene.width);
}

}  // namespace ooro
