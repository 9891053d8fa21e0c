#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"
#include "osmroad/maxflow.hpp"
#include "osmroad/morphology.hpp"

namespace osmroad {

struct GrabcutConfig {
  std::optional<PixelRect> bg_rect;  // default: rows [0, 0.30 H), full width
  std::optional<PixelRect> fg_rect;  // default: rows [0.80 H, H) x cols [0.35 W, 0.65 W)
  int gmm_components = 5;
  int max_iters = 5;
  double gamma = 50.0;
  double convergence = 0.001;
  double epsilon = 0.01;  // covariance regularization, in squared 8-bit color units
  std::uint64_t seed = 0;
};

inline PixelRect default_bg_rect(int w, int h) {
  return {0, 0, w, static_cast<int>(std::floor(0.30 * h))};
}

inline PixelRect default_fg_rect(int w, int h) {
  return {static_cast<int>(std::floor(0.35 * w)), static_cast<int>(std::floor(0.80 * h)),
          static_cast<int>(std::floor(0.65 * w)), h};
}

struct GrabcutResult {
  RoadMask mask;
  std::vector<double> energy;  // total energy after each graph cut
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

using Color = Eigen::Vector3d;

/// Gaussian mixture with full covariances regularized by epsilon * I.
class Gmm {
 public:
  struct Component {
    double weight = 0.0;
    Color mean = Color::Zero();
    Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
    double log_det = 0.0;
    double constant = 0.0;  // -log weight + 0.5 log det + 0.5 eps tr(inverse)
  };

  Gmm() = default;

  /// Maximum a posteriori fit of the per-component parameters for a fixed assignment.
  /// Components without samples are dropped.
  void fit(const std::vector<Color>& samples, const std::vector<int>& assignment, int k,
           double epsilon) {
    components_.clear();
    std::vector<double> count(static_cast<std::size_t>(k), 0.0);
    std::vector<Color> sum(static_cast<std::size_t>(k), Color::Zero());
    std::vector<Eigen::Matrix3d> outer(static_cast<std::size_t>(k), Eigen::Matrix3d::Zero());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto c = static_cast<std::size_t>(assignment[i]);
      count[c] += 1.0;
      sum[c] += samples[i];
    }
    std::vector<Color> mean(static_cast<std::size_t>(k), Color::Zero());
    for (std::size_t c = 0; c < mean.size(); ++c) {
      if (count[c] > 0) mean[c] = sum[c] / count[c];
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto c = static_cast<std::size_t>(assignment[i]);
      const Color d = samples[i] - mean[c];
      outer[c] += d * d.transpose();
    }
    const double total = static_cast<double>(samples.size());
    for (std::size_t c = 0; c < count.size(); ++c) {
      if (count[c] == 0) continue;
      Component comp;
      comp.weight = count[c] / total;
      comp.mean = mean[c];
      const Eigen::Matrix3d cov = outer[c] / count[c] + epsilon * Eigen::Matrix3d::Identity();
      comp.inverse = cov.inverse();
      comp.log_det = std::log(cov.determinant());
      comp.constant = -std::log(comp.weight) + 0.5 * comp.log_det +
                      0.5 * epsilon * comp.inverse.trace();
      components_.push_back(comp);
    }
  }

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Component>& components() const noexcept { return components_; }

  double cost(const Color& z, std::size_t c) const {
    const auto& comp = components_[c];
    const Color d = z - comp.mean;
    return comp.constant + 0.5 * d.dot(comp.inverse * d);
  }

  /// Lowest component cost and the component achieving it (first on ties).
  std::pair<double, int> best(const Color& z) const {
    double lo = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < components_.size(); ++c) {
      const double v = cost(z, c);
      if (v < lo) {
        lo = v;
        arg = static_cast<int>(c);
      }
    }
    return {lo, arg};
  }

 private:
  std::vector<Component> components_;
};

namespace detail {

inline double unit_random(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// k-means with k-means++ seeding. Returns one label per sample; fewer than k clusters
/// are produced when the samples hold fewer distinct colors.
inline std::vector<int> kmeans(const std::vector<Color>& pts, int k, std::uint64_t seed,
                               int iterations = 10) {
  std::vector<int> label(pts.size(), 0);
  if (pts.empty()) return label;
  std::mt19937_64 rng(seed);
  std::vector<Color> centers;
  centers.push_back(pts[static_cast<std::size_t>(rng() % pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = (pts[i] - centers[0]).squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (total <= 0.0) break;
    double target = unit_random(rng) * total;
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      target -= d2[i];
      if (target < 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    if (d2[pick] <= 0.0) break;
    centers.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], (pts[i] - centers.back()).squaredNorm());
    }
  }
  const std::size_t kc = centers.size();
  for (int it = 0; it < iterations; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kc; ++c) {
        const double v = (pts[i] - centers[c]).squaredNorm();
        if (v < lo) {
          lo = v;
          best = static_cast<int>(c);
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Color> sum(kc, Color::Zero());
    std::vector<double> n(kc, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[static_cast<std::size_t>(label[i])] += pts[i];
      n[static_cast<std::size_t>(label[i])] += 1.0;
    }
    for (std::size_t c = 0; c < kc; ++c) {
      if (n[c] > 0) centers[c] = sum[c] / n[c];
    }
  }
  return label;
}

// 8-neighbourhood with each pair listed once: right, down-left, down, down-right.
constexpr int kPairDx[4] = {1, -1, 0, 1};
constexpr int kPairDy[4] = {0, 1, 1, 1};

}  // namespace detail

/// Iterated GrabCut with hard rectangle seeds. Label 1 = road (foreground).
inline GrabcutResult grabcut(const RgbImage& image, const GrabcutConfig& cfg = {}) {
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.size();
  const PixelRect bg = cfg.bg_rect.value_or(default_bg_rect(w, h));
  const PixelRect fg = cfg.fg_rect.value_or(default_fg_rect(w, h));
  if (!bg.inside(w, h) || !fg.inside(w, h) || bg.intersects(fg)) {
    throw Error(Errc::rect_out_of_bounds, "seed rectangles must be non-empty, disjoint and inside the " +
                                              std::to_string(w) + "x" + std::to_string(h) + " image");
  }
  if (cfg.gmm_components < 1 || cfg.max_iters < 1 || cfg.gamma < 0 || cfg.epsilon <= 0) {
    throw Error(Errc::invalid_argument, "invalid GrabCut parameters");
  }

  GrabcutResult result;
  std::vector<Color> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = Color(image[i][0], image[i][1], image[i][2]);

  // Seeds: 1 = certain road, 0 = certain background, -1 = free.
  std::vector<std::int8_t> seed(n, -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (fg.contains(x, y)) seed[image.index(x, y)] = 1;
      else if (bg.contains(x, y)) seed[image.index(x, y)] = 0;
    }
  }

  // Pairwise weights.
  double sum_sq = 0.0;
  std::size_t pairs = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d < 4; ++d) {
        const int nx = x + detail::kPairDx[d];
        const int ny = y + detail::kPairDy[d];
        if (!image.contains(nx, ny)) continue;
        sum_sq += (z[image.index(x, y)] - z[image.index(nx, ny)]).squaredNorm();
        ++pairs;
      }
    }
  }
  const double beta = sum_sq > 0 ? 1.0 / (2.0 * sum_sq / static_cast<double>(pairs)) : 0.0;
  std::vector<std::array<double, 4>> pair_w(n, {0.0, 0.0, 0.0, 0.0});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = image.index(x, y);
      for (int d = 0; d < 4; ++d) {
        const int nx = x + detail::kPairDx[d];
        const int ny = y + detail::kPairDy[d];
        if (!image.contains(nx, ny)) continue;
        const double dist = d == 0 || d == 2 ? 1.0 : std::sqrt(2.0);
        pair_w[i][static_cast<std::size_t>(d)] =
            cfg.gamma * std::exp(-beta * (z[i] - z[image.index(nx, ny)]).squaredNorm()) / dist;
      }
    }
  }
  const double hard = 8.0 * cfg.gamma + 1.0;

  std::vector<std::uint8_t> alpha(n, 0);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = seed[i] == 1 ? 1 : 0;

  // Initial GMMs from k-means over the seed pixels.
  Gmm gmm[2];
  for (int label = 0; label < 2; ++label) {
    std::vector<Color> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (seed[i] == label) pts.push_back(z[i]);
    }
    int k = cfg.gmm_components;
    if (static_cast<int>(pts.size()) < k) k = static_cast<int>(pts.size());
    const auto assign = detail::kmeans(pts, k, cfg.seed + static_cast<std::uint64_t>(label));
    gmm[label].fit(pts, assign, k, cfg.epsilon);
    if (static_cast<int>(gmm[label].size()) < cfg.gmm_components) {
      result.warnings.push_back(std::string(errc_name(Errc::degenerate_gmm)) + ": " +
                                (label ? "road" : "background") + " model reduced to " +
                                std::to_string(gmm[label].size()) + " components");
    }
  }

  auto total_energy = [&](const std::vector<std::uint8_t>& a) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += gmm[a[i]].best(z[i]).first;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = image.index(x, y);
        for (int d = 0; d < 4; ++d) {
          const int nx = x + detail::kPairDx[d];
          const int ny = y + detail::kPairDy[d];
          if (image.contains(nx, ny) && a[i] != a[image.index(nx, ny)]) {
            e += pair_w[i][static_cast<std::size_t>(d)];
          }
        }
      }
    }
    return e;
  };

  std::size_t free_pixels = 0;
  for (auto s : seed) free_pixels += s < 0 ? 1 : 0;

  MaxFlow graph;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (it > 0) {
      // Component assignment, then parameter update for the current labeling.
      for (int label = 0; label < 2; ++label) {
        std::vector<Color> pts;
        std::vector<int> assign;
        for (std::size_t i = 0; i < n; ++i) {
          if (alpha[i] != label) continue;
          pts.push_back(z[i]);
          assign.push_back(gmm[label].best(z[i]).second);
        }
        gmm[label].fit(pts, assign, static_cast<int>(gmm[label].size()), cfg.epsilon);
      }
    }

    graph.reset(n);
    graph.reserve_edges(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
      if (seed[i] == 1) {
        graph.add_tweights(i, hard, 0.0);
      } else if (seed[i] == 0) {
        graph.add_tweights(i, 0.0, hard);
      } else {
        const double d_fg = gmm[1].best(z[i]).first;
        const double d_bg = gmm[0].best(z[i]).first;
        const double lo = std::min(d_fg, d_bg);
        graph.add_tweights(i, d_bg - lo, d_fg - lo);
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = image.index(x, y);
        for (int d = 0; d < 4; ++d) {
          const int nx = x + detail::kPairDx[d];
          const int ny = y + detail::kPairDy[d];
          if (!image.contains(nx, ny)) continue;
          const double wt = pair_w[i][static_cast<std::size_t>(d)];
          if (wt > 0) graph.add_edge(i, image.index(nx, ny), wt, wt);
        }
      }
    }
    graph.solve();

    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t a = graph.segment(i) == MaxFlow::Segment::source ? 1 : 0;
      if (a != alpha[i] && seed[i] < 0) ++changed;
      alpha[i] = a;
    }
    result.energy.push_back(total_energy(alpha));
    result.iterations = it + 1;
    if (it > 0 && static_cast<double>(changed) <=
                      cfg.convergence * static_cast<double>(std::max<std::size_t>(free_pixels, 1))) {
      result.converged = true;
      break;
    }
  }

  BinaryGrid road(w, h, 0);
  for (std::size_t i = 0; i < n; ++i) road[i] = alpha[i];
  result.mask = to_mask(components_touching(road, fg, Connectivity::eight));
  return result;
}

inline RoadMask grabcut_road(const RgbImage& image, const GrabcutConfig& cfg = {}) {
  return grabcut(image, cfg).mask;
}

}  // namespace osmroad
