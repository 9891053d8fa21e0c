#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "osmroad/grid.hpp"

namespace osmroad {

using BinaryGrid = Grid<std::uint8_t>;

enum class Connectivity { four = 4, eight = 8 };

inline BinaryGrid to_binary(const RoadMask& m) {
  BinaryGrid out(m.width(), m.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.values[i] > 0.5 ? 1 : 0;
  return out;
}

inline RoadMask to_mask(const BinaryGrid& g) {
  RoadMask out(g.width(), g.height(), MaskKind::binary);
  for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = g[i] ? 1.0 : 0.0;
  return out;
}

struct Components {
  Grid<std::int32_t> labels;       // -1 for background, else 0-based in scan order of first pixel
  std::vector<std::size_t> sizes;
};

inline Components label_components(const BinaryGrid& fg, Connectivity conn) {
  Components c{Grid<std::int32_t>(fg.width(), fg.height(), -1), {}};
  std::vector<std::size_t> stack;
  const int w = fg.width();
  const int h = fg.height();
  for (std::size_t start = 0; start < fg.size(); ++start) {
    if (!fg[start] || c.labels[start] >= 0) continue;
    const auto label = static_cast<std::int32_t>(c.sizes.size());
    std::size_t size = 0;
    c.labels[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (conn == Connectivity::four && dx != 0 && dy != 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t j = fg.index(nx, ny);
          if (fg[j] && c.labels[j] < 0) {
            c.labels[j] = label;
            stack.push_back(j);
          }
        }
      }
    }
    c.sizes.push_back(size);
  }
  return c;
}

inline BinaryGrid keep_component(const Components& c, std::int32_t label) {
  BinaryGrid out(c.labels.width(), c.labels.height(), 0);
  if (label < 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.labels[i] == label ? 1 : 0;
  return out;
}

/// Largest connected component; ties go to the component whose first pixel comes first
/// in row-major order.
inline BinaryGrid largest_component(const BinaryGrid& fg, Connectivity conn = Connectivity::eight) {
  const auto c = label_components(fg, conn);
  std::int32_t best = -1;
  for (std::size_t l = 0; l < c.sizes.size(); ++l) {
    if (best < 0 || c.sizes[l] > c.sizes[static_cast<std::size_t>(best)]) {
      best = static_cast<std::int32_t>(l);
    }
  }
  return keep_component(c, best);
}

/// Union of the components touching any pixel of `rect`.
inline BinaryGrid components_touching(const BinaryGrid& fg, const PixelRect& rect,
                                      Connectivity conn = Connectivity::eight) {
  const auto c = label_components(fg, conn);
  std::vector<std::uint8_t> keep(c.sizes.size(), 0);
  for (int y = std::max(0, rect.y0); y < std::min(fg.height(), rect.y1); ++y) {
    for (int x = std::max(0, rect.x0); x < std::min(fg.width(), rect.x1); ++x) {
      const auto l = c.labels(x, y);
      if (l >= 0) keep[static_cast<std::size_t>(l)] = 1;
    }
  }
  BinaryGrid out(fg.width(), fg.height(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c.labels[i] >= 0 && keep[static_cast<std::size_t>(c.labels[i])] ? 1 : 0;
  }
  return out;
}

namespace detail {

// Half-widths of a digital disc per row offset: x^2 + dy^2 <= r^2.
inline std::vector<int> disc_half_widths(int r) {
  std::vector<int> hw(static_cast<std::size_t>(2 * r + 1));
  for (int dy = -r; dy <= r; ++dy) {
    hw[static_cast<std::size_t>(dy + r)] =
        static_cast<int>(std::floor(std::sqrt(static_cast<double>(r * r - dy * dy)) + 1e-9));
  }
  return hw;
}

// Pixel is set when any (erode: every) disc neighbour inside the image is set.
inline BinaryGrid disc_filter(const BinaryGrid& in, int r, bool dilate) {
  const int w = in.width();
  const int h = in.height();
  if (r <= 0) return in;
  const auto hw = disc_half_widths(r);
  // Row prefix sums of set pixels.
  std::vector<int> prefix(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h), 0);
  auto P = [&](int x, int y) -> int& {
    return prefix[static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1) +
                  static_cast<std::size_t>(x)];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) P(x + 1, y) = P(x, y) + in(x, y);

  BinaryGrid out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool result = !dilate;
      for (int dy = -r; dy <= r && result != dilate; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int k = hw[static_cast<std::size_t>(dy + r)];
        const int x0 = std::max(0, x - k);
        const int x1 = std::min(w - 1, x + k);
        const int set = P(x1 + 1, yy) - P(x0, yy);
        if (dilate && set > 0) result = true;
        if (!dilate && set < x1 - x0 + 1) result = false;
      }
      out(x, y) = result ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

/// Dilation by a digital disc of radius r.
inline BinaryGrid dilate(const BinaryGrid& in, int r) { return detail::disc_filter(in, r, true); }

/// Erosion by a digital disc; pixels outside the image do not erode.
inline BinaryGrid erode(const BinaryGrid& in, int r) { return detail::disc_filter(in, r, false); }

/// Closing with background outside the image: computed on a padded copy so the border
/// neither erodes nor invents road.
inline BinaryGrid close(const BinaryGrid& in, int r) {
  if (r <= 0) return in;
  const int pad = r + 1;
  BinaryGrid padded(in.width() + 2 * pad, in.height() + 2 * pad, 0);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) padded(x + pad, y + pad) = in(x, y);
  const auto closed = erode(dilate(padded, r), r);
  BinaryGrid out(in.width(), in.height(), 0);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) out(x, y) = closed(x + pad, y + pad);
  return out;
}

}  // namespace osmroad
