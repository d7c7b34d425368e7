#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "pdfcorpus/embeddings.hpp"
#include "pdfcorpus/error.hpp"

namespace pdfcorpus {

PageRaster::PageRaster(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
  if (w < 1 || h < 1) throw Error(ErrorCode::InvalidArgument, "raster must be at least 1x1");
  if (pixels.size() != static_cast<std::size_t>(w) * h) {
    throw Error(ErrorCode::InvalidArgument, "raster pixel count must equal width x height");
  }
}

namespace {

bool is_edge_pixel(const PageRaster& r, std::uint32_t x, std::uint32_t y) {
  const int c = r.at(x, y);
  int d = std::max({std::abs(c - r.at(x - 1, y)), std::abs(c - r.at(x + 1, y)), std::abs(c - r.at(x, y - 1)),
                    std::abs(c - r.at(x, y + 1))});
  return d > kEdgeThreshold;
}

}  // namespace

PageFeatures builtin_page_features(const PageRaster& raster) {
  constexpr int G = kFeatureGrid;
  const std::uint64_t w = raster.width, h = raster.height;
  std::array<double, 2 * G * G> feat{};
  for (int cy = 0; cy < G; ++cy) {
    const auto y0 = static_cast<std::uint32_t>(cy * h / G), y1 = static_cast<std::uint32_t>((cy + 1) * h / G);
    for (int cx = 0; cx < G; ++cx) {
      const auto x0 = static_cast<std::uint32_t>(cx * w / G), x1 = static_cast<std::uint32_t>((cx + 1) * w / G);
      std::uint64_t sum = 0, count = 0, interior = 0, edges = 0;
      for (std::uint32_t y = y0; y < y1; ++y) {
        for (std::uint32_t x = x0; x < x1; ++x) {
          sum += raster.at(x, y);
          ++count;
          if (x > 0 && y > 0 && x + 1 < w && y + 1 < h) {
            ++interior;
            if (is_edge_pixel(raster, x, y)) ++edges;
          }
        }
      }
      const int cell = cy * G + cx;
      feat[cell] = count ? static_cast<double>(sum) / (255.0 * static_cast<double>(count)) : 0.0;
      feat[G * G + cell] = interior ? static_cast<double>(edges) / static_cast<double>(interior) : 0.0;
    }
  }
  double sq = 0.0;
  for (double v : feat) sq += v * v;
  PageFeatures out;
  out.values.assign(feat.size(), 0.0f);
  if (sq == 0.0) {
    out.blank = true;
    return out;
  }
  const double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < feat.size(); ++i) out.values[i] = static_cast<float>(feat[i] / norm);
  return out;
}

}  // namespace pdfcorpus
