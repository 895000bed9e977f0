#include "ooro/geometry.hpp"

#include <cmath>
#include <numeric>

#include "ooro/error.hpp"

namespace ooro {

BinaryMask decode_rle(std::span<const std::uint32_t> counts, int height, int width) {
  if (height < 0 || width < 0) {
    throw Error(ErrorKind::LengthMismatch, "negative mask dimensions");
  }
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  const std::uint64_t expected = std::uint64_t(height) * std::uint64_t(width);
  if (total != expected) {
    throw Error(ErrorKind::LengthMismatch, "run lengths sum to " + std::to_string(total) +
                                               ", expected " + std::to_string(expected));
  }
  BinaryMask mask = BinaryMask::Zero(height, width);
  bool* data = mask.data();
  std::uint64_t pos = 0;
  bool value = false;
  for (const auto run : counts) {
    if (value) std::fill(data + pos, data + pos + run, true);
    pos += run;
    value = !value;
  }
  return mask;
}

// Inverse of the COCO API's rleToString: 5 bits per char offset by 48, with a
// continuation bit and sign extension, and counts past the second stored as deltas.
std::vector<std::uint32_t> rle_counts_from_string(std::string_view s) {
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) {
        throw Error(ErrorKind::MalformedAnnotation, "truncated compressed RLE string");
      }
      const std::int64_t c = std::int64_t(s[p]) - 48;
      if (c < 0 || c > 63) {
        throw Error(ErrorKind::MalformedAnnotation, "invalid character in compressed RLE string");
      }
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 2) x += std::int64_t(counts[counts.size() - 2]);
    if (x < 0) throw Error(ErrorKind::MalformedAnnotation, "negative run in compressed RLE string");
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return counts;
}

namespace {

void fill_polygon(BinaryMask& mask, std::span<const double> xy) {
  const std::size_t n = xy.size() / 2;
  const int height = int(mask.rows());
  const int width = int(mask.cols());
  std::vector<double> crossings;
  crossings.reserve(n);
  for (int r = 0; r < height; ++r) {
    const double yc = r + 0.5;
    crossings.clear();
    for (std::size_t e = 0; e < n; ++e) {
      double x0 = xy[2 * e], y0 = xy[2 * e + 1];
      double x1 = xy[2 * ((e + 1) % n)], y1 = xy[2 * ((e + 1) % n) + 1];
      if ((y0 > yc) == (y1 > yc)) continue;
      // Interpolate from the upper endpoint so the crossing is independent of edge direction.
      if (y1 < y0) {
        std::swap(x0, x1);
        std::swap(y0, y1);
      }
      crossings.push_back(x0 + (yc - y0) * (x1 - x0) / (y1 - y0));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const double lo = std::ceil(crossings[k] - 0.5);
      const double hi = std::ceil(crossings[k + 1] - 0.5);
      const int c0 = int(std::clamp(lo, 0.0, double(width)));
      const int c1 = int(std::clamp(hi, 0.0, double(width)));
      for (int c = c0; c < c1; ++c) mask(r, c) = true;
    }
  }
}

}  // namespace

BinaryMask rasterize_polygon(std::span<const double> xy, int height, int width) {
  if (xy.size() < 6) {
    throw Error(ErrorKind::DegeneratePolygon,
                "polygon needs at least 3 vertices, got " + std::to_string(xy.size() / 2));
  }
  for (const double v : xy) {
    if (!std::isfinite(v)) throw Error(ErrorKind::DegeneratePolygon, "non-finite vertex");
  }
  BinaryMask mask = BinaryMask::Zero(height, width);
  fill_polygon(mask, xy);
  return mask;
}

BinaryMask rasterize_polygons(const std::vector<std::vector<double>>& parts, int height,
                              int width) {
  BinaryMask mask = BinaryMask::Zero(height, width);
  for (const auto& part : parts) mask = mask || rasterize_polygon(part, height, width);
  return mask;
}

std::int64_t count_in_region(const BinaryMask& mask, const BBox& region) {
  // Pixel c is inside iff region.x <= c + 0.5 < region.x + region.w.
  const auto first = [](double lo, Eigen::Index limit) {
    return Eigen::Index(std::clamp(std::ceil(lo - 0.5), 0.0, double(limit)));
  };
  const Eigen::Index c0 = first(region.x, mask.cols());
  const Eigen::Index c1 = first(region.right(), mask.cols());
  const Eigen::Index r0 = first(region.y, mask.rows());
  const Eigen::Index r1 = first(region.bottom(), mask.rows());
  if (c1 <= c0 || r1 <= r0) return 0;
  return mask.block(r0, c0, r1 - r0, c1 - c0).count();
}

BBox mask_bbox(const BinaryMask& mask) {
  const auto rows = mask.rowwise().any();
  const auto cols = mask.colwise().any();
  if (!rows.any()) return {};
  Eigen::Index r0 = 0, r1 = mask.rows() - 1, c0 = 0, c1 = mask.cols() - 1;
  while (!rows(r0)) ++r0;
  while (!rows(r1)) --r1;
  while (!cols(c0)) ++c0;
  while (!cols(c1)) --c1;
  return BBox{double(c0), double(r0), double(c1 - c0 + 1), double(r1 - r0 + 1)};
}

BBox segmentation_bbox(const Segmentation& seg) {
  if (const auto* poly = std::get_if<PolygonSegmentation>(&seg)) {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool any = false;
    for (const auto& part : poly->parts) {
      for (std::size_t k = 0; k + 1 < part.size(); k += 2) {
        const double x = part[k], y = part[k + 1];
        if (!any) {
          x0 = x1 = x;
          y0 = y1 = y;
          any = true;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    return BBox{x0, y0, x1 - x0, y1 - y0};
  }
  const auto& rle = std::get<RleSegmentation>(seg);
  std::vector<std::uint32_t> expanded;
  const std::vector<std::uint32_t>* counts = std::get_if<std::vector<std::uint32_t>>(&rle.counts);
  if (!counts) {
    expanded = rle_counts_from_string(std::get<std::string>(rle.counts));
    counts = &expanded;
  }
  const std::uint64_t h = std::uint64_t(std::max(rle.height, 0));
  if (h == 0) return {};
  std::uint64_t pos = 0;
  std::uint64_t r0 = h, r1 = 0, c0 = ~std::uint64_t{0}, c1 = 0;
  bool any = false;
  for (std::size_t k = 0; k < counts->size(); ++k) {
    const std::uint64_t run = (*counts)[k];
    if (k % 2 == 1 && run > 0) {
      const std::uint64_t first = pos, last = pos + run - 1;
      const std::uint64_t fc = first / h, lc = last / h;
      any = true;
      c0 = std::min(c0, fc);
      c1 = std::max(c1, lc);
      if (fc != lc) {
        r0 = 0;
        r1 = h - 1;
      } else {
        r0 = std::min(r0, first % h);
        r1 = std::max(r1, last % h);
      }
    }
    pos += run;
  }
  if (!any) return {};
  return BBox{double(c0), double(r0), double(c1 - c0 + 1), double(r1 - r0 + 1)};
}

BinaryMask decode_segmentation(const Segmentation& seg, int height, int width) {
  if (const auto* poly = std::get_if<PolygonSegmentation>(&seg)) {
    return rasterize_polygons(poly->parts, height, width);
  }
  const auto& rle = std::get<RleSegmentation>(seg);
  if (rle.height != height || rle.width != width) {
    throw Error(ErrorKind::LengthMismatch,
                "RLE size " + std::to_string(rle.height) + "x" + std::to_string(rle.width) +
                    " does not match image " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  if (const auto* counts = std::get_if<std::vector<std::uint32_t>>(&rle.counts)) {
    return decode_rle(*counts, height, width);
  }
  const auto counts = rle_counts_from_string(std::get<std::string>(rle.counts));
  return decode_rle(counts, height, width);
}

}  // namespace ooro
