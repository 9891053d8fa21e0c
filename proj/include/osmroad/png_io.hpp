#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"

namespace osmroad {

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io_error, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(Errc::io_error, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(Errc::io_error, "short write to " + path.string());
  }
}

class PngImage {
 public:
  PngImage() {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image_); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;

  png_image* get() { return &image_; }
  png_image* operator->() { return &image_; }

 private:
  png_image image_;
};

inline std::vector<std::uint8_t> decode_png(const std::vector<std::uint8_t>& bytes,
                                            std::uint32_t format, int& width, int& height,
                                            const std::string& name) {
  PngImage img;
  if (!png_image_begin_read_from_memory(img.get(), bytes.data(), bytes.size())) {
    throw Error(Errc::io_error, name + ": " + img->message);
  }
  img->format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(*img.get()));
  if (!png_image_finish_read(img.get(), nullptr, pixels.data(), 0, nullptr)) {
    throw Error(Errc::io_error, name + ": " + img->message);
  }
  width = static_cast<int>(img->width);
  height = static_cast<int>(img->height);
  return pixels;
}

inline std::vector<std::uint8_t> encode_png(const void* pixels, int width, int height,
                                            std::uint32_t format) {
  PngImage img;
  img->width = static_cast<png_uint_32>(width);
  img->height = static_cast<png_uint_32>(height);
  img->format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(img.get(), nullptr, &size, 0, pixels, 0, nullptr)) {
    throw Error(Errc::io_error, std::string("png encode: ") + img->message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(img.get(), out.data(), &size, 0, pixels, 0, nullptr)) {
    throw Error(Errc::io_error, std::string("png encode: ") + img->message);
  }
  out.resize(size);
  return out;
}

}  // namespace detail

inline RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes,
                               const std::string& name = "png") {
  int w = 0;
  int h = 0;
  auto px = detail::decode_png(bytes, PNG_FORMAT_RGB, w, h, name);
  RgbImage img(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = {px[3 * i], px[3 * i + 1], px[3 * i + 2]};
  }
  return img;
}

inline RgbImage read_rgb_png(const std::filesystem::path& path) {
  return decode_rgb_png(detail::read_file_bytes(path), path.string());
}

inline Grid<std::uint8_t> read_gray_png(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto px = detail::decode_png(detail::read_file_bytes(path), PNG_FORMAT_GRAY, w, h,
                               path.string());
  Grid<std::uint8_t> g(w, h);
  std::copy(px.begin(), px.end(), g.values().begin());
  return g;
}

inline void write_gray_png(const std::filesystem::path& path, const Grid<std::uint8_t>& g) {
  detail::write_file_bytes(
      path, detail::encode_png(g.values().data(), g.width(), g.height(), PNG_FORMAT_GRAY));
}

inline void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  std::vector<std::uint8_t> px;
  px.reserve(img.size() * 3);
  for (const auto& c : img.values()) {
    px.insert(px.end(), c.begin(), c.end());
  }
  detail::write_file_bytes(path,
                           detail::encode_png(px.data(), img.width(), img.height(), PNG_FORMAT_RGB));
}

/// 16-bit single-channel PNG, used for superpixel label dumps.
inline void write_gray16_png(const std::filesystem::path& path, const Grid<std::uint16_t>& g) {
  detail::write_file_bytes(path, detail::encode_png(g.values().data(), g.width(), g.height(),
                                                    PNG_FORMAT_LINEAR_Y));
}

inline Grid<std::uint16_t> read_gray16_png(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto px = detail::decode_png(detail::read_file_bytes(path), PNG_FORMAT_LINEAR_Y, w, h,
                               path.string());
  Grid<std::uint16_t> g(w, h);
  std::memcpy(g.values().data(), px.data(), g.size() * sizeof(std::uint16_t));
  return g;
}

/// Binary masks map to {0, 255}; confidence masks to round(255 * P).
inline Grid<std::uint8_t> mask_to_gray(const RoadMask& mask) {
  Grid<std::uint8_t> g(mask.width(), mask.height());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::clamp(mask.values[i], 0.0, 1.0);
    g[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return g;
}

inline void write_mask_png(const std::filesystem::path& path, const RoadMask& mask) {
  write_gray_png(path, mask_to_gray(mask));
}

inline RoadMask read_mask_png(const std::filesystem::path& path, MaskKind kind) {
  const auto g = read_gray_png(path);
  RoadMask m(g.width(), g.height(), kind);
  for (std::size_t i = 0; i < g.size(); ++i) {
    m.values[i] = kind == MaskKind::binary ? (g[i] >= 128 ? 1.0 : 0.0) : g[i] / 255.0;
  }
  return m;
}

}  // namespace osmroad
