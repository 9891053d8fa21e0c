#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "osmroad/error.hpp"
#include "osmroad/grid.hpp"

namespace osmroad {

enum class MaskSource { osm_refined, osm_candidates, grabcut, lanemark, lidar };

inline constexpr std::array<MaskSource, 5> kFusedSources = {
    MaskSource::osm_refined, MaskSource::osm_candidates, MaskSource::grabcut,
    MaskSource::lanemark, MaskSource::lidar};

struct FusionWeights {
  // Order follows kFusedSources.
  std::array<double, 5> w = {0.2, 0.2, 0.2, 0.2, 0.2};

  double& operator[](MaskSource s) { return w[static_cast<std::size_t>(s)]; }
  double operator[](MaskSource s) const { return w[static_cast<std::size_t>(s)]; }

  void validate() const {
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::bad_weights, "weight outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(Errc::bad_weights, "weights sum to " + std::to_string(sum));
    }
  }
};

/// Per-pixel weighted sum of masks. Weights must lie in [0, 1] and sum to 1.
inline RoadMask fuse(std::span<const RoadMask> masks, std::span<const double> weights) {
  if (masks.empty() || masks.size() != weights.size()) {
    throw Error(Errc::bad_weights, "one weight per mask required");
  }
  double sum = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::bad_weights, "weight outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::bad_weights, "weights sum to " + std::to_string(sum));
  for (const auto& m : masks) require_same_shape(masks[0], m, "fuse");
  RoadMask out(masks[0].width(), masks[0].height(), MaskKind::confidence);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < masks.size(); ++k) v += weights[k] * masks[k].values[i];
    out.values[i] = v;
  }
  return out;
}

inline RoadMask fuse(std::span<const RoadMask, 5> masks, const FusionWeights& w) {
  w.validate();
  return fuse(std::span<const RoadMask>(masks.data(), masks.size()), std::span<const double>(w.w));
}

/// 1 where the value is strictly above t.
inline RoadMask threshold(const RoadMask& conf, double t) {
  RoadMask out(conf.width(), conf.height(), MaskKind::binary);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = conf.values[i] > t ? 1.0 : 0.0;
  return out;
}

enum class Category { um, umm, uu };

inline std::string_view category_name(Category c) {
  switch (c) {
    case Category::um: return "UM";
    case Category::umm: return "UMM";
    case Category::uu: return "UU";
  }
  return "?";
}

/// Category from a KITTI frame id such as "umm_000012".
inline std::optional<Category> category_of(std::string_view frame) {
  if (frame.starts_with("umm_")) return Category::umm;
  if (frame.starts_with("um_")) return Category::um;
  if (frame.starts_with("uu_")) return Category::uu;
  return std::nullopt;
}

struct Counts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  Category category = Category::um;
  bool precision_undefined = false;  // TP + FP == 0
  bool recall_undefined = false;     // TP + FN == 0
};

inline EvalResult score(const Counts& c, Category category) {
  EvalResult r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.category = category;
  if (c.tp + c.fp > 0) {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    r.precision_undefined = true;
  }
  if (c.tp + c.fn > 0) {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    r.recall_undefined = true;
  }
  if (r.precision + r.recall > 0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

inline Counts count_pixels(const RoadMask& pred, const RoadMask& gt) {
  require_same_shape(pred, gt, "evaluate");
  Counts c;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i] > 0.5;
    const bool g = gt.values[i] > 0.5;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
  }
  return c;
}

inline EvalResult evaluate(const RoadMask& pred, const RoadMask& gt, Category category = Category::um) {
  return score(count_pixels(pred, gt), category);
}

struct PrPoint {
  double t = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrSweep {
  std::vector<PrPoint> points;
  std::size_t best = 0;  // argmax F1, first on ties

  const PrPoint& operating_point() const { return points.at(best); }
};

inline std::vector<double> sweep_thresholds(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error(Errc::invalid_argument, "sweep step must be in (0, 1]");
  const auto n = static_cast<int>(std::lround(1.0 / step));
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(std::min(1.0, i * step));
  return t;
}

inline PrSweep make_sweep(const std::vector<double>& thresholds, const std::vector<Counts>& counts) {
  PrSweep s;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const auto r = score(counts[i], Category::um);
    s.points.push_back({thresholds[i], r.precision, r.recall, r.f1});
    if (r.f1 > s.points[s.best].f1) s.best = i;
  }
  return s;
}

inline PrSweep pr_sweep(const RoadMask& conf, const RoadMask& gt, double step = 0.01) {
  require_same_shape(conf, gt, "pr_sweep");
  const auto ts = sweep_thresholds(step);
  std::vector<Counts> counts;
  for (double t : ts) counts.push_back(count_pixels(threshold(conf, t), gt));
  return make_sweep(ts, counts);
}

// Confidence values stored as 16-bit levels q = round(v * 65535). Thresholding a stored
// mask at t compares q > round(t * 65535), so evaluating PNGs and in-memory masks agree.
inline constexpr double kConfidenceScale = 65535.0;

inline std::uint16_t quantize_level(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * kConfidenceScale));
}

inline Grid<std::uint16_t> quantize(const RoadMask& conf) {
  Grid<std::uint16_t> q(conf.width(), conf.height(), 0);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize_level(conf.values[i]);
  return q;
}

inline RoadMask dequantize(const Grid<std::uint16_t>& q) {
  RoadMask out(q.width(), q.height(), MaskKind::confidence);
  for (std::size_t i = 0; i < q.size(); ++i) out.values[i] = q[i] / kConfidenceScale;
  return out;
}

/// Per-level counts of ground-truth road and non-road pixels; sums over frames give the
/// micro-averaged sweep of a category.
class ConfidenceHistogram {
 public:
  ConfidenceHistogram() : pos_(65536, 0), neg_(65536, 0) {}

  void add(const Grid<std::uint16_t>& q, const RoadMask& gt) {
    if (!gt.values.same_shape(q)) throw Error(Errc::shape_mismatch, "confidence and ground truth differ in size");
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (gt.values[i] > 0.5) ++pos_[q[i]];
      else ++neg_[q[i]];
    }
  }

  void add_level(std::uint16_t level, std::uint64_t pos, std::uint64_t neg) {
    pos_[level] += pos;
    neg_[level] += neg;
  }

  ConfidenceHistogram& operator+=(const ConfidenceHistogram& o) {
    for (std::size_t i = 0; i < pos_.size(); ++i) {
      pos_[i] += o.pos_[i];
      neg_[i] += o.neg_[i];
    }
    return *this;
  }

  Counts counts_at(double t) const {
    const std::size_t level = quantize_level(t);
    Counts c;
    for (std::size_t i = 0; i < pos_.size(); ++i) {
      if (i > level) {
        c.tp += pos_[i];
        c.fp += neg_[i];
      } else {
        c.fn += pos_[i];
      }
    }
    return c;
  }

  PrSweep sweep(double step = 0.01) const {
    const auto ts = sweep_thresholds(step);
    std::vector<Counts> counts;
    for (double t : ts) counts.push_back(counts_at(t));
    return make_sweep(ts, counts);
  }

 private:
  std::vector<std::uint64_t> pos_;
  std::vector<std::uint64_t> neg_;
};

/// Ground-truth decoding: a pixel is road when it equals `color` exactly, or, in channel
/// mode, when channel `channel` exceeds `channel_min`.
struct GtRule {
  enum class Mode { exact_color, channel } mode = Mode::exact_color;
  Rgb color = {255, 0, 255};
  int channel = 2;
  int channel_min = 0;
};

inline RoadMask decode_gt(const RgbImage& image, const GtRule& rule = {}) {
  RoadMask out(image.width(), image.height(), MaskKind::binary);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto& p = image[i];
    const bool road = rule.mode == GtRule::Mode::exact_color
                          ? p == rule.color
                          : p[static_cast<std::size_t>(rule.channel)] > rule.channel_min;
    out.values[i] = road ? 1.0 : 0.0;
  }
  return out;
}

/// Table rows: `rows` in order, each with one EvalResult per category present.
struct ResultTable {
  std::vector<std::string> rows;
  std::map<std::string, std::map<Category, EvalResult>> cells;
  std::map<std::string, std::map<Category, double>> thresholds;  // confidence rows only
};

inline std::string format_table(const ResultTable& table) {
  constexpr std::array<Category, 3> cats = {Category::um, Category::umm, Category::uu};
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(18) << "Mask";
  for (auto c : cats) {
    const std::string name(category_name(c));
    out << std::setw(8) << (name + " P") << std::setw(8) << (name + " R") << std::setw(8) << (name + " F1");
  }
  out << '\n';
  for (const auto& row : table.rows) {
    out << std::left << std::setw(18) << row;
    const auto it = table.cells.find(row);
    for (auto c : cats) {
      if (it == table.cells.end() || !it->second.contains(c)) {
        out << std::setw(8) << "-" << std::setw(8) << "-" << std::setw(8) << "-";
        continue;
      }
      const auto& r = it->second.at(c);
      out << std::setw(8) << r.precision << std::setw(8) << r.recall << std::setw(8) << r.f1;
    }
    out << '\n';
  }
  bool any_threshold = false;
  for (const auto& [row, per_cat] : table.thresholds) {
    for (const auto& [cat, t] : per_cat) {
      if (!any_threshold) out << "\nOperating thresholds\n";
      any_threshold = true;
      out << "  " << row << ' ' << category_name(cat) << ": " << std::setprecision(2) << t
          << std::setprecision(4) << '\n';
    }
  }
  return out.str();
}

/// Two-column plot data (recall precision) plus threshold and F1 per line.
inline std::string format_pr_dat(const PrSweep& s) {
  std::ostringstream out;
  out << "# recall precision threshold f1\n" << std::fixed << std::setprecision(6);
  for (const auto& p : s.points) {
    out << p.recall << ' ' << p.precision << ' ' << std::setprecision(2) << p.t << std::setprecision(6)
        << ' ' << p.f1 << '\n';
  }
  return out.str();
}

}  // namespace osmroad
