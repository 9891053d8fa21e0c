#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"

namespace osmroad {

struct LaneMarkConfig {
  double blur_sigma = 1.5;
  double canny_low = 50.0;  // on the unnormalized 3x3 Sobel magnitude of 8-bit gray
  double canny_high = 150.0;
  double hough_rho = 1.0;     // px
  double hough_theta = 1.0;   // degrees
  int hough_votes = 30;
  double min_len = 20.0;  // px
  double max_gap = 10.0;  // px
  double horizon_frac = 0.55;
  double min_abs_slope = 0.3;
  int degree = 1;  // 1 or 2
  // Edge ROI: trapezoid from the full-width bottom row up to horizon_frac * H, where it
  // spans [roi_top_left, roi_top_right] * W.
  double roi_top_left = 0.20;
  double roi_top_right = 0.80;

  void validate() const {
    if (!(canny_low < canny_high)) throw Error(Errc::invalid_argument, "canny_low must be < canny_high");
    if (!(horizon_frac > 0.0 && horizon_frac < 1.0)) {
      throw Error(Errc::invalid_argument, "horizon_frac must be in (0, 1)");
    }
    if (degree != 1 && degree != 2) throw Error(Errc::invalid_argument, "lane fit degree must be 1 or 2");
    if (hough_rho <= 0 || hough_theta <= 0 || blur_sigma <= 0) {
      throw Error(Errc::invalid_argument, "non-positive lane-mark parameter");
    }
  }
};

struct LineSegment {
  double x0, y0, x1, y1;

  double slope() const { return (y1 - y0) / (x1 - x0); }
};

/// x = sum coeffs[i] * y^i.
struct LaneCurve {
  std::vector<double> coeffs;

  double x_at(double y) const {
    double x = 0.0;
    double p = 1.0;
    for (double c : coeffs) {
      x += c * p;
      p *= y;
    }
    return x;
  }
};

struct LaneMarkResult {
  RoadMask mask;
  bool found = false;  // false corresponds to NoLaneFound
  std::optional<LaneCurve> left;
  std::optional<LaneCurve> right;
  Grid<std::uint8_t> edges;            // Canny output restricted to the ROI
  std::vector<LineSegment> segments;   // all Hough segments before the slope filter
};

namespace detail {

inline Grid<double> to_gray(const RgbImage& img) {
  Grid<double> g(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    g[i] = 0.299 * img[i][0] + 0.587 * img[i][1] + 0.114 * img[i][2];
  }
  return g;
}

/// Separable Gaussian blur, radius ceil(3 sigma), replicated border.
inline Grid<double> gaussian_blur(const Grid<double>& in, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (auto& v : k) v /= sum;
  const int w = in.width();
  const int h = in.height();
  Grid<double> tmp(w, h);
  Grid<double> out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = s;
    }
  }
  return out;
}

/// Canny edges: 3x3 Sobel, L2 magnitude, non-maximum suppression, 8-connected hysteresis.
inline Grid<std::uint8_t> canny(const Grid<double>& g, double low, double high) {
  const int w = g.width();
  const int h = g.height();
  Grid<double> gx(w, h, 0.0);
  Grid<double> gy(w, h, 0.0);
  Grid<double> mag(w, h, 0.0);
  auto at = [&](int x, int y) { return g(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
      const double dy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
      gx(x, y) = dx;
      gy(x, y) = dy;
      mag(x, y) = std::hypot(dx, dy);
    }
  }
  // 0 none, 1 weak, 2 strong
  Grid<std::uint8_t> cls(w, h, 0);
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double m = mag(x, y);
      if (m <= low) continue;
      const double ax = std::abs(gx(x, y));
      const double ay = std::abs(gy(x, y));
      double m1;
      double m2;
      if (ay <= ax * tan22) {
        m1 = mag(x - 1, y);
        m2 = mag(x + 1, y);
      } else if (ay >= ax * tan67) {
        m1 = mag(x, y - 1);
        m2 = mag(x, y + 1);
      } else if ((gx(x, y) > 0) == (gy(x, y) > 0)) {
        m1 = mag(x - 1, y - 1);
        m2 = mag(x + 1, y + 1);
      } else {
        m1 = mag(x + 1, y - 1);
        m2 = mag(x - 1, y + 1);
      }
      if (m > m1 && m >= m2) cls(x, y) = m > high ? 2 : 1;
    }
  }
  Grid<std::uint8_t> edges(w, h, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i] == 2 && !edges[i]) {
      edges[i] = 1;
      stack.push_back(i);
    }
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(j % static_cast<std::size_t>(w));
      const int y = static_cast<int>(j / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!cls.contains(x + dx, y + dy)) continue;
          const std::size_t k = cls.index(x + dx, y + dy);
          if (cls[k] && !edges[k]) {
            edges[k] = 1;
            stack.push_back(k);
          }
        }
      }
    }
  }
  return edges;
}

inline bool in_roi(double x, double y, int w, int h, const LaneMarkConfig& cfg) {
  const double top = cfg.horizon_frac * h;
  if (y < top || y > h) return false;
  const double t = (h - y) / (h - top);  // 0 at the bottom, 1 at the top
  const double left = t * cfg.roi_top_left * w;
  const double right = w + t * (cfg.roi_top_right * w - w);
  return x >= left && x <= right;
}

/// Standard Hough transform; each accumulator peak (local maximum over a 5x5 window)
/// with enough votes yields the runs of its supporting pixels no longer than max_gap
/// apart and at least min_len long.
inline std::vector<LineSegment> hough_segments(const Grid<std::uint8_t>& edges,
                                               const LaneMarkConfig& cfg,
                                               std::vector<std::vector<Eigen::Vector2d>>* support) {
  const int w = edges.width();
  const int h = edges.height();
  std::vector<Eigen::Vector2d> pts;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (edges(x, y)) pts.emplace_back(x, y);

  const int n_theta = static_cast<int>(std::round(180.0 / cfg.hough_theta));
  const double diag = std::hypot(w, h);
  const int n_rho = 2 * static_cast<int>(std::ceil(diag / cfg.hough_rho)) + 1;
  const int rho_off = n_rho / 2;
  std::vector<double> cs(static_cast<std::size_t>(n_theta));
  std::vector<double> sn(static_cast<std::size_t>(n_theta));
  for (int t = 0; t < n_theta; ++t) {
    const double th = t * cfg.hough_theta * std::numbers::pi / 180.0;
    cs[static_cast<std::size_t>(t)] = std::cos(th);
    sn[static_cast<std::size_t>(t)] = std::sin(th);
  }
  Grid<int> acc(n_theta, n_rho, 0);
  auto rho_bin = [&](const Eigen::Vector2d& p, int t) {
    const double rho = p.x() * cs[static_cast<std::size_t>(t)] + p.y() * sn[static_cast<std::size_t>(t)];
    return static_cast<int>(std::lround(rho / cfg.hough_rho)) + rho_off;
  };
  for (const auto& p : pts)
    for (int t = 0; t < n_theta; ++t) ++acc(t, rho_bin(p, t));

  std::vector<LineSegment> out;
  for (int r = 0; r < n_rho; ++r) {
    for (int t = 0; t < n_theta; ++t) {
      const int v = acc(t, r);
      if (v < cfg.hough_votes) continue;
      bool peak = true;
      for (int dr = -2; dr <= 2 && peak; ++dr) {
        for (int dt = -2; dt <= 2 && peak; ++dt) {
          if (dr == 0 && dt == 0) continue;
          const int tt = t + dt;
          const int rr = r + dr;
          if (tt < 0 || rr < 0 || tt >= n_theta || rr >= n_rho) continue;
          const int o = acc(tt, rr);
          // Plateau ties resolve to the first cell in scan order.
          const bool earlier = dr < 0 || (dr == 0 && dt < 0);
          if (o > v || (earlier && o == v)) peak = false;
        }
      }
      if (!peak) continue;
      // Supporting pixels ordered along the line direction.
      const double c = cs[static_cast<std::size_t>(t)];
      const double s = sn[static_cast<std::size_t>(t)];
      std::vector<std::pair<double, Eigen::Vector2d>> along;
      for (const auto& p : pts) {
        if (rho_bin(p, t) == r) along.emplace_back(-p.x() * s + p.y() * c, p);
      }
      std::sort(along.begin(), along.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && (a.second.y() < b.second.y() ||
                                                            (a.second.y() == b.second.y() &&
                                                             a.second.x() < b.second.x())));
      });
      std::size_t start = 0;
      for (std::size_t i = 1; i <= along.size(); ++i) {
        if (i < along.size() && along[i].first - along[i - 1].first <= cfg.max_gap) continue;
        const auto& a = along[start].second;
        const auto& b = along[i - 1].second;
        if ((b - a).norm() >= cfg.min_len) {
          out.push_back({a.x(), a.y(), b.x(), b.y()});
          if (support) {
            support->emplace_back();
            for (std::size_t k = start; k < i; ++k) support->back().push_back(along[k].second);
          }
        }
        start = i;
      }
    }
  }
  return out;
}

inline LaneCurve fit_curve(const std::vector<Eigen::Vector2d>& pts, int degree) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), degree + 1);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      A(static_cast<Eigen::Index>(i), d) = p;
      p *= pts[i].y();
    }
    b(static_cast<Eigen::Index>(i)) = pts[i].x();
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return {std::vector<double>(c.data(), c.data() + c.size())};
}

}  // namespace detail

/// Fills, row by row from the bottom up to horizon_frac * H, the pixels whose centers lie
/// between the two curves.
inline RoadMask fill_between(const LaneCurve& left, const LaneCurve& right, int w, int h,
                             double horizon_frac) {
  RoadMask mask(w, h);
  const int y_top = static_cast<int>(std::ceil(horizon_frac * h));
  for (int y = std::max(0, y_top); y < h; ++y) {
    const double xl = left.x_at(y);
    const double xr = right.x_at(y);
    const int x0 = std::max(0, static_cast<int>(std::ceil(xl)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(xr)));
    for (int x = x0; x <= x1; ++x) mask(x, y) = 1.0;
  }
  return mask;
}

inline LaneMarkResult lane_marks(const RgbImage& image, const LaneMarkConfig& cfg = {}) {
  cfg.validate();
  const int w = image.width();
  const int h = image.height();
  LaneMarkResult result;
  result.mask = RoadMask(w, h);
  if (image.empty()) return result;

  auto edges = detail::canny(detail::gaussian_blur(detail::to_gray(image), cfg.blur_sigma),
                             cfg.canny_low, cfg.canny_high);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!detail::in_roi(x, y, w, h, cfg)) edges(x, y) = 0;

  std::vector<std::vector<Eigen::Vector2d>> support;
  result.segments = detail::hough_segments(edges, cfg, &support);
  result.edges = std::move(edges);

  // Image y grows downward: the left lane mark rises to the right (negative slope).
  std::vector<Eigen::Vector2d> left_pts;
  std::vector<Eigen::Vector2d> right_pts;
  for (std::size_t i = 0; i < result.segments.size(); ++i) {
    const auto& s = result.segments[i];
    if (s.x1 == s.x0) continue;
    const double m = s.slope();
    if (std::abs(m) < cfg.min_abs_slope) continue;
    auto& dst = m < 0 ? left_pts : right_pts;
    dst.insert(dst.end(), support[i].begin(), support[i].end());
  }
  if (left_pts.empty() || right_pts.empty()) return result;
  // Overlapping peaks share pixels; each edge pixel counts once per family.
  for (auto* v : {&left_pts, &right_pts}) {
    auto less = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
      return a.y() < b.y() || (a.y() == b.y() && a.x() < b.x());
    };
    std::sort(v->begin(), v->end(), less);
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }

  result.left = detail::fit_curve(left_pts, cfg.degree);
  result.right = detail::fit_curve(right_pts, cfg.degree);
  result.mask = fill_between(*result.left, *result.right, w, h, cfg.horizon_frac);
  result.found = true;
  return result;
}

inline RoadMask lane_mark_mask(const RgbImage& image, const LaneMarkConfig& cfg = {}) {
  return lane_marks(image, cfg).mask;
}

/// Debug overlay: edges in yellow and Hough segments in red over the input.
inline RgbImage lane_debug_overlay(const RgbImage& image, const LaneMarkResult& r) {
  RgbImage out = image;
  if (r.edges.same_shape(image)) {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (r.edges[i]) out[i] = {255, 255, 0};
  }
  for (const auto& s : r.segments) {
    const int steps = static_cast<int>(std::ceil(std::hypot(s.x1 - s.x0, s.y1 - s.y0))) + 1;
    for (int k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      const int x = static_cast<int>(std::lround(s.x0 + t * (s.x1 - s.x0)));
      const int y = static_cast<int>(std::lround(s.y0 + t * (s.y1 - s.y0)));
      if (out.contains(x, y)) out(x, y) = {255, 0, 0};
    }
  }
  return out;
}

}  // namespace osmroad
