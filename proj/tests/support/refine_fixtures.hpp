#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "osmroad/refine.hpp"

namespace osmroad::test_support {

// Smooth color field with noise, enough texture for SLIC to behave like on a photo.
inline RgbImage textured_image(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(-12, 12);
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto clamp8 = [](int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); };
      img(x, y) = {clamp8(128 + static_cast<int>(80 * std::sin(x * 0.021)) + noise(rng)),
                   clamp8(100 + static_cast<int>(60 * std::cos(y * 0.05 + x * 0.01)) + noise(rng)),
                   clamp8(90 + (y * 150) / h + noise(rng))};
    }
  }
  return img;
}

inline SuperpixelMap column_segments(int w, int h, const std::vector<int>& starts) {
  SuperpixelMap sp{Grid<std::int32_t>(w, h, 0), static_cast<int>(starts.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int l = 0;
      for (std::size_t k = 0; k < starts.size(); ++k) {
        if (x >= starts[k]) l = static_cast<int>(k);
      }
      sp.labels(x, y) = l;
    }
  }
  return sp;
}

// Marks the first `count` pixels (scan order) of segment `label` as road.
inline void paint(RoadMask& m, const SuperpixelMap& sp, int label, std::size_t count) {
  for (std::size_t i = 0; i < sp.labels.size() && count > 0; ++i) {
    if (sp.labels[i] == label) {
      m.values[i] = 1.0;
      --count;
    }
  }
}

// Exhaustive oracle: per segment road fraction from a full pixel scan, > 0.5 segments
// united, components of the union found by brute-force 8-neighbour merging.
inline RoadMask relabel_oracle(const SuperpixelMap& sp, const RoadMask& init) {
  std::map<int, std::pair<std::size_t, std::size_t>> counts;
  for (int y = 0; y < init.height(); ++y)
    for (int x = 0; x < init.width(); ++x) {
      auto& c = counts[sp.labels(x, y)];
      c.second++;
      if (init(x, y) == 1.0) c.first++;
    }
  const int w = init.width(), h = init.height();
  std::vector<int> comp(static_cast<std::size_t>(w * h), -1);
  auto road = [&](int x, int y) {
    const auto& c = counts[sp.labels(x, y)];
    return static_cast<double>(c.first) / static_cast<double>(c.second) > 0.5;
  };
  // Union-find over road pixels.
  std::vector<int> parent(static_cast<std::size_t>(w * h));
  for (int i = 0; i < w * h; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!road(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || !road(nx, ny)) continue;
          const int a = find(y * w + x), b = find(ny * w + nx);
          if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    }
  std::map<int, std::size_t> sizes;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (road(x, y)) sizes[find(y * w + x)]++;
  int best = -1;
  std::size_t best_size = 0;
  for (auto [root, size] : sizes) {  // roots ascend with scan index, so ties keep the first
    if (size > best_size) {
      best = root;
      best_size = size;
    }
  }
  RoadMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (road(x, y) && find(y * w + x) == best) out(x, y) = 1.0;
  return out;
}

}  // namespace osmroad::test_support
