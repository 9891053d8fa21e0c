#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "osmroad/error.hpp"

namespace osmroad {

/// Row-major single-channel raster.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(int w, int h) const noexcept { return width_ == w && height_ == h; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width < 0 || height < 0) {
      throw Error(Errc::invalid_argument, "negative grid dimensions");
    }
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit interleaved RGB image.
using RgbImage = Grid<Rgb>;

enum class MaskKind { binary, confidence };

/// Road mask: per-pixel road value in [0, 1]. Binary masks hold only 0 and 1.
struct RoadMask {
  Grid<double> values;
  MaskKind kind = MaskKind::binary;

  RoadMask() = default;
  RoadMask(int width, int height, MaskKind k = MaskKind::binary)
      : values(width, height, 0.0), kind(k) {}
  RoadMask(Grid<double> v, MaskKind k) : values(std::move(v)), kind(k) {}

  int width() const noexcept { return values.width(); }
  int height() const noexcept { return values.height(); }
  double& operator()(int x, int y) { return values(x, y); }
  double operator()(int x, int y) const { return values(x, y); }

  bool is_set(int x, int y) const { return values(x, y) > 0.5; }

  std::size_t count_positive() const {
    return static_cast<std::size_t>(
        std::count_if(values.values().begin(), values.values().end(),
                      [](double v) { return v > 0.0; }));
  }

  friend bool operator==(const RoadMask&, const RoadMask&) = default;
};

inline void require_same_shape(const RoadMask& a, const RoadMask& b, const char* what) {
  if (!a.values.same_shape(b.values)) {
    throw Error(Errc::shape_mismatch,
                std::string(what) + ": " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

/// Pixel-aligned rectangle, half-open: [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool inside(int width, int height) const noexcept {
    return x0 >= 0 && y0 >= 0 && x1 <= width && y1 <= height && !empty();
  }
  bool intersects(const PixelRect& o) const noexcept {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
};

}  // namespace osmroad
