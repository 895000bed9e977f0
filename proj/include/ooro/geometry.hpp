#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ooro {

/// Axis-aligned box in pixel coordinates; y grows downward.
template <typename Scalar>
struct Box {
  Scalar x{0};
  Scalar y{0};
  Scalar w{0};
  Scalar h{0};

  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }
  Scalar area() const { return w * h; }

  friend bool operator==(const Box&, const Box&) = default;
};

using BBox = Box<double>;

/// Rows are image rows (height), columns are image columns (width). Storage is
/// column-major, which is also the flattening order of COCO run-length encodings.
using BinaryMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Overlap rectangle of two boxes; empty when the overlap has zero area,
/// so boxes that only share an edge do not intersect.
template <typename Scalar>
std::optional<Box<Scalar>> bbox_intersection(const Box<Scalar>& a, const Box<Scalar>& b) {
  const Scalar x0 = std::max(a.x, b.x);
  const Scalar y0 = std::max(a.y, b.y);
  const Scalar x1 = std::min(a.right(), b.right());
  const Scalar y1 = std::min(a.bottom(), b.bottom());
  if (!(x1 > x0) || !(y1 > y0)) return std::nullopt;
  return Box<Scalar>{x0, y0, x1 - x0, y1 - y0};
}

/// Clamps a box to [0,width]x[0,height]; boxes outside collapse to zero size.
template <typename Scalar>
Box<Scalar> clamp_box(const Box<Scalar>& b, Scalar width, Scalar height) {
  const Scalar x0 = std::clamp(b.x, Scalar(0), width);
  const Scalar y0 = std::clamp(b.y, Scalar(0), height);
  const Scalar x1 = std::clamp(b.right(), Scalar(0), width);
  const Scalar y1 = std::clamp(b.bottom(), Scalar(0), height);
  return Box<Scalar>{x0, y0, std::max(x1 - x0, Scalar(0)), std::max(y1 - y0, Scalar(0))};
}

/// Decodes uncompressed COCO RLE counts (alternating runs, zeros first, column-major).
BinaryMask decode_rle(std::span<const std::uint32_t> counts, int height, int width);

/// Expands the compact LEB128-style string form of COCO RLE into run counts.
std::vector<std::uint32_t> rle_counts_from_string(std::string_view s);

/// Rasterizes one polygon: pixel (r,c) is set iff its center (c+0.5, r+0.5)
/// lies inside under the even-odd rule. Throws DegeneratePolygon below 3 vertices.
BinaryMask rasterize_polygon(std::span<const double> xy, int height, int width);

/// Union of several polygon parts (a COCO polygon segmentation).
BinaryMask rasterize_polygons(const std::vector<std::vector<double>>& parts, int height, int width);

/// Number of set pixels whose centers fall inside `region` (half-open on the far edges).
std::int64_t count_in_region(const BinaryMask& mask, const BBox& region);

/// Tight bounding box of the set pixels; empty mask gives a zero box.
BBox mask_bbox(const BinaryMask& mask);

/// COCO segmentation field in any of its three stored forms.
struct PolygonSegmentation {
  std::vector<std::vector<double>> parts;
};

struct RleSegmentation {
  int height{0};
  int width{0};
  std::variant<std::vector<std::uint32_t>, std::string> counts;
};

using Segmentation = std::variant<PolygonSegmentation, RleSegmentation>;

/// Bounding box of a segmentation without rasterizing: polygon vertex extents,
/// or the pixel extents of the RLE runs.
BBox segmentation_bbox(const Segmentation& seg);

/// Decodes a segmentation onto an image-sized canvas.
BinaryMask decode_segmentation(const Segmentation& seg, int height, int width);

}  // namespace ooro
