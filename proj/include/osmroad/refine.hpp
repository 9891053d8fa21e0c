#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"
#include "osmroad/morphology.hpp"

namespace osmroad {

/// Segment labels 0..count-1, each segment 4-connected.
struct SuperpixelMap {
  Grid<std::int32_t> labels;
  int count = 0;
};

struct SlicConfig {
  int k = 800;
  double compactness = 10.0;
  int iterations = 10;
};

using Lab = std::array<double, 3>;

/// sRGB (D65) to CIE Lab.
inline Lab rgb_to_lab(const Rgb& c) {
  auto lin = [](std::uint8_t v) {
    const double s = v / 255.0;
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
  };
  const double r = lin(c[0]);
  const double g = lin(c[1]);
  const double b = lin(c[2]);
  const double X = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double Z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  auto f = [](double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(X);
  const double fy = f(Y);
  const double fz = f(Z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline Grid<Lab> to_lab(const RgbImage& img) {
  Grid<Lab> out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = rgb_to_lab(img[i]);
  return out;
}

/// Seed grid for k segments on a w x h image: (columns, rows), never more than k seeds.
inline std::pair<int, int> slic_grid(int k, int w, int h) {
  const int ny = std::max(1, static_cast<int>(std::lround(std::sqrt(double(k) * h / w))));
  int nx = std::max(1, static_cast<int>(std::lround(double(k) / ny)));
  int rows = ny;
  if (nx * rows > k) {
    nx = std::min(nx, k);
    rows = std::max(1, k / nx);
  }
  return {std::min(nx, w), std::min(rows, h)};
}

namespace detail {

struct SlicCenter {
  double l, a, b, x, y;
};

/// Relabels 4-connected pieces; pieces smaller than `min_size` join the segment of an
/// adjacent, already visited pixel. Labels come out consecutive in scan order.
inline SuperpixelMap enforce_connectivity(const Grid<std::int32_t>& raw, std::size_t min_size) {
  const int w = raw.width();
  const int h = raw.height();
  Grid<std::int32_t> out(w, h, -1);
  std::int32_t next = 0;
  std::vector<std::size_t> piece;
  constexpr int dx4[4] = {-1, 0, 1, 0};
  constexpr int dy4[4] = {0, -1, 0, 1};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (out(x, y) >= 0) continue;
      // Label of a previously labeled 4-neighbour, used if this piece is too small.
      std::int32_t adjacent = -1;
      for (int d = 0; d < 4; ++d) {
        const int nx = x + dx4[d];
        const int ny = y + dy4[d];
        if (raw.contains(nx, ny) && out(nx, ny) >= 0) {
          adjacent = out(nx, ny);
          break;
        }
      }
      piece.clear();
      const std::int32_t old = raw(x, y);
      out(x, y) = next;
      piece.push_back(raw.index(x, y));
      for (std::size_t head = 0; head < piece.size(); ++head) {
        const int px = static_cast<int>(piece[head] % static_cast<std::size_t>(w));
        const int py = static_cast<int>(piece[head] / static_cast<std::size_t>(w));
        for (int d = 0; d < 4; ++d) {
          const int nx = px + dx4[d];
          const int ny = py + dy4[d];
          if (raw.contains(nx, ny) && out(nx, ny) < 0 && raw(nx, ny) == old) {
            out(nx, ny) = next;
            piece.push_back(raw.index(nx, ny));
          }
        }
      }
      if (piece.size() < min_size && adjacent >= 0) {
        for (auto i : piece) out[i] = adjacent;
      } else {
        ++next;
      }
    }
  }
  return {std::move(out), next};
}

}  // namespace detail

/// SLIC superpixels: k-means over (L, a, b, x, y) with compactness m, seeds on a regular
/// grid nudged to the lowest gradient in their 3x3 neighbourhood, search window 2S.
inline SuperpixelMap superpixels(const RgbImage& image, const SlicConfig& cfg = {}) {
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.size();
  if (n == 0) throw Error(Errc::invalid_argument, "empty image");
  if (cfg.k < 1) throw Error(Errc::invalid_argument, "superpixel count must be >= 1");
  if (static_cast<std::size_t>(cfg.k) > n) {
    throw Error(Errc::k_too_large, std::to_string(cfg.k) + " segments for " + std::to_string(n) +
                                       " pixels");
  }
  const auto lab = to_lab(image);
  const auto [nx, ny] = slic_grid(cfg.k, w, h);
  const double S = std::sqrt(static_cast<double>(n) / (nx * ny));

  auto grad = [&](int x, int y) {
    if (x <= 0 || y <= 0 || x >= w - 1 || y >= h - 1) return std::numeric_limits<double>::infinity();
    double g = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double gx = lab(x + 1, y)[static_cast<std::size_t>(c)] - lab(x - 1, y)[static_cast<std::size_t>(c)];
      const double gy = lab(x, y + 1)[static_cast<std::size_t>(c)] - lab(x, y - 1)[static_cast<std::size_t>(c)];
      g += gx * gx + gy * gy;
    }
    return g;
  };

  std::vector<detail::SlicCenter> centers;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int cx = std::min(w - 1, static_cast<int>((i + 0.5) * w / nx));
      int cy = std::min(h - 1, static_cast<int>((j + 0.5) * h / ny));
      double best = grad(cx, cy);
      const int ox = cx;
      const int oy = cy;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double g = grad(ox + dx, oy + dy);
          if (g < best) {
            best = g;
            cx = ox + dx;
            cy = oy + dy;
          }
        }
      }
      const auto& c = lab(cx, cy);
      centers.push_back({c[0], c[1], c[2], double(cx), double(cy)});
    }
  }

  // Start from the seed-grid cells so pixels outside every window still carry a label.
  Grid<std::int32_t> labels(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const int j = std::min(ny - 1, y * ny / h);
    for (int x = 0; x < w; ++x) labels(x, y) = j * nx + std::min(nx - 1, x * nx / w);
  }

  const double spatial = (cfg.compactness / S) * (cfg.compactness / S);
  std::vector<double> dist(n);
  std::vector<std::array<double, 6>> sums(centers.size());
  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(std::floor(c.x - 2.0 * S)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + 2.0 * S)));
      const int y0 = std::max(0, static_cast<int>(std::floor(c.y - 2.0 * S)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + 2.0 * S)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const auto& p = lab(x, y);
          const double dl = p[0] - c.l;
          const double da = p[1] - c.a;
          const double db = p[2] - c.b;
          const double ddx = x - c.x;
          const double ddy = y - c.y;
          const double d = dl * dl + da * da + db * db + spatial * (ddx * ddx + ddy * ddy);
          const std::size_t i = labels.index(x, y);
          if (d < dist[i]) {
            dist[i] = d;
            labels[i] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    for (auto& s : sums) s.fill(0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto& s = sums[static_cast<std::size_t>(labels(x, y))];
        const auto& p = lab(x, y);
        s[0] += p[0];
        s[1] += p[1];
        s[2] += p[2];
        s[3] += x;
        s[4] += y;
        s[5] += 1.0;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& s = sums[k];
      if (s[5] == 0.0) continue;
      centers[k] = {s[0] / s[5], s[1] / s[5], s[2] / s[5], s[3] / s[5], s[4] / s[5]};
    }
  }
  const std::size_t min_size = std::max<std::size_t>(1, n / (centers.size() * 4));
  return detail::enforce_connectivity(labels, min_size);
}

/// Per-segment road/total pixel counts of a binary mask.
struct SegmentCounts {
  std::vector<std::size_t> road;
  std::vector<std::size_t> total;
};

inline SegmentCounts segment_counts(const SuperpixelMap& sp, const RoadMask& init) {
  if (!sp.labels.same_shape(init.values)) {
    throw Error(Errc::shape_mismatch, "superpixel map and mask differ in size");
  }
  SegmentCounts c{std::vector<std::size_t>(static_cast<std::size_t>(sp.count), 0),
                  std::vector<std::size_t>(static_cast<std::size_t>(sp.count), 0)};
  for (std::size_t i = 0; i < sp.labels.size(); ++i) {
    const auto l = static_cast<std::size_t>(sp.labels[i]);
    ++c.total[l];
    if (init.values[i] > 0.5) ++c.road[l];
  }
  return c;
}

/// A segment becomes road when strictly more than half its pixels are road in `init`;
/// then only the largest 8-connected road component is kept.
inline RoadMask relabel(const SuperpixelMap& sp, const RoadMask& init) {
  const auto c = segment_counts(sp, init);
  BinaryGrid road(init.width(), init.height(), 0);
  for (std::size_t i = 0; i < sp.labels.size(); ++i) {
    const auto l = static_cast<std::size_t>(sp.labels[i]);
    road[i] = 2 * c.road[l] > c.total[l] ? 1 : 0;
  }
  return to_mask(largest_component(road, Connectivity::eight));
}

inline RoadMask refine_mask(const RgbImage& image, const RoadMask& init, const SlicConfig& cfg = {}) {
  return relabel(superpixels(image, cfg), init);
}

}  // namespace osmroad
