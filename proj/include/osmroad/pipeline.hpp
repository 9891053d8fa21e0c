#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "osmroad/attribute_io.hpp"
#include "osmroad/attributes.hpp"
#include "osmroad/camera.hpp"
#include "osmroad/error.hpp"
#include "osmroad/fusion_eval.hpp"
#include "osmroad/geodesy.hpp"
#include "osmroad/grabcut.hpp"
#include "osmroad/lane_marks.hpp"
#include "osmroad/lidar.hpp"
#include "osmroad/osm_model.hpp"
#include "osmroad/png_io.hpp"
#include "osmroad/refine.hpp"
#include "osmroad/renderer.hpp"
#include "osmroad/spatial_index.hpp"

namespace osmroad {

namespace fs = std::filesystem;

/// Input and output locations. The per-frame directories default to the KITTI road
/// layout under `data`: image_2/, calib/, velodyne/, gt_image_2/ and pose/.
struct PipelinePaths {
  fs::path osm;
  fs::path data;
  fs::path image_dir;
  fs::path calib_dir;
  fs::path velodyne_dir;
  fs::path gt_dir;
  fs::path pose_dir;
  fs::path poses;     // pose track for `attributes`
  fs::path dynamics;  // optional 13-column dynamics for the feature file
  fs::path output = "out";

  fs::path images() const { return pick(image_dir, "image_2"); }
  fs::path calib() const { return pick(calib_dir, "calib"); }
  fs::path velodyne() const { return pick(velodyne_dir, "velodyne"); }
  fs::path gt() const { return pick(gt_dir, "gt_image_2"); }
  fs::path pose() const { return pick(pose_dir, "pose"); }

 private:
  fs::path pick(const fs::path& p, const char* sub) const {
    if (!p.empty()) return p;
    return data.empty() ? fs::path{} : data / sub;
  }
};

enum class Stage { attributes, masks, eval };

struct PipelineConfig {
  PipelinePaths paths;
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: hardware concurrency
  std::vector<std::string> frames;  // empty: every image in the image directory
  bool debug = false;
  bool signed_curvature = false;

  RenderConfig render;  // render.attributes also drives the attribute records
  PoseCandidateSpec candidates;
  SlicConfig superpixels;
  GrabcutConfig grabcut;
  LaneMarkConfig lanemark;
  GroundSegConfig ground;
  FusionWeights weights;

  std::optional<double> threshold;  // unset: per-category argmax F1
  double sweep_step = 0.01;
  GtRule gt_rule;

  void validate(Stage stage) const {
    auto require = [](const fs::path& p, const char* what) {
      if (p.empty()) throw Error(Errc::config_error, std::string(what) + " path not set");
      if (!fs::exists(p)) throw Error(Errc::config_error, std::string(what) + " not found: " + p.string());
    };
    if (jobs < 0) throw Error(Errc::config_error, "jobs must be >= 0");
    try {
      weights.validate();
    } catch (const Error& e) {
      throw Error(Errc::config_error, e.what());
    }
    if (threshold && !(*threshold >= 0.0 && *threshold <= 1.0)) {
      throw Error(Errc::config_error, "threshold must be in [0, 1]");
    }
    if (!(sweep_step > 0.0 && sweep_step <= 1.0)) throw Error(Errc::config_error, "sweep_step must be in (0, 1]");
    if (gt_rule.channel < 0 || gt_rule.channel > 2) throw Error(Errc::config_error, "gt channel must be 0, 1 or 2");
    switch (stage) {
      case Stage::attributes:
        require(paths.osm, "osm");
        require(paths.poses, "poses");
        if (!paths.dynamics.empty()) require(paths.dynamics, "dynamics");
        break;
      case Stage::masks:
        require(paths.osm, "osm");
        require(paths.images(), "image directory");
        require(paths.calib(), "calibration directory");
        require(paths.pose(), "pose directory");
        if (candidates.n < 1) throw Error(Errc::config_error, "candidate count must be >= 1");
        if (superpixels.k < 1) throw Error(Errc::config_error, "superpixel count must be >= 1");
        try {
          lanemark.validate();
          ground.validate();
        } catch (const Error& e) {
          throw Error(Errc::config_error, e.what());
        }
        break;
      case Stage::eval:
        require(paths.gt(), "ground-truth directory");
        require(paths.output / "masks", "mask directory");
        break;
    }
  }
};

/// Exit codes shared by the runners and the command line.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;

struct RunStatus {
  int exit_code = kExitOk;
  std::vector<std::string> failures;  // "frame: message"
};

namespace detail {

inline int worker_count(int jobs, std::size_t tasks) {
  int n = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(tasks, 1)));
}

/// Runs f(i) for i in [0, n) on a pool of threads pulling indices from a shared counter.
/// f must not throw.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const int workers = worker_count(jobs, n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) f(i);
  };
  if (workers <= 1) {
    run();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
}

/// FNV-1a over the little-endian bytes of the seed followed by the frame id.
inline std::uint64_t frame_seed(std::uint64_t seed, std::string_view frame) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(seed >> (8 * i)));
  for (char c : frame) mix(static_cast<std::uint8_t>(c));
  return h;
}

inline std::vector<std::string> list_frames(const fs::path& image_dir) {
  std::vector<std::string> frames;
  for (const auto& e : fs::directory_iterator(image_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") frames.push_back(e.path().stem().string());
  }
  std::sort(frames.begin(), frames.end());
  return frames;
}

inline void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

/// Pose expressed in the given zone (poses near a zone border are reprojected).
inline VehiclePose in_zone(VehiclePose p, int zone, Hemisphere hemi) {
  if (p.utm.zone != zone || p.utm.hemisphere != hemi) p.utm = to_utm_zone(p.lat, p.lon, zone, hemi);
  return p;
}

}  // namespace detail

inline std::vector<std::string> resolve_frames(const PipelineConfig& cfg) {
  return cfg.frames.empty() ? detail::list_frames(cfg.paths.images()) : cfg.frames;
}

// --- attributes --------------------------------------------------------------------------

/// Writes attributes.csv and features.csv (25 columns) to the output directory, one
/// record per pose. All poses are expressed in the zone of the first.
inline RunStatus run_attributes(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate(Stage::attributes);
  const auto parsed = load_osm_file(cfg.paths.osm);
  auto poses = read_pose_file(cfg.paths.poses);
  std::vector<DynamicsRecord> dynamics;
  if (!cfg.paths.dynamics.empty()) {
    std::ifstream in(cfg.paths.dynamics);
    dynamics = read_dynamics(in, cfg.paths.dynamics.string());
  } else {
    dynamics = dynamics_from_poses(poses);
  }
  if (dynamics.size() != poses.size()) {
    throw Error(Errc::length_mismatch, std::to_string(poses.size()) + " poses vs " +
                                           std::to_string(dynamics.size()) + " dynamics records");
  }

  std::vector<SceneAttributes> attrs;
  if (!poses.empty()) {
    const int zone = poses.front().utm.zone;
    const auto hemi = poses.front().utm.hemisphere;
    for (auto& p : poses) p = detail::in_zone(p, zone, hemi);
    const auto index = SpatialIndex::build(parsed.graph, zone, hemi);
    attrs.resize(poses.size());
    std::vector<std::exception_ptr> errors(poses.size());
    detail::parallel_for(poses.size(), cfg.jobs, [&](std::size_t i) {
      try {
        attrs[i] = scene_attributes(parsed.graph, index, poses[i], cfg.render.attributes);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  fs::create_directories(cfg.paths.output);
  std::ostringstream a;
  write_attribute_csv(a, poses, attrs, cfg.signed_curvature);
  detail::write_text(cfg.paths.output / "attributes.csv", a.str());
  std::ostringstream f;
  export_features(f, attrs, dynamics, cfg.signed_curvature);
  detail::write_text(cfg.paths.output / "features.csv", f.str());
  log << "attributes: " << poses.size() << " records\n";
  return {};
}

// --- masks ----------------------------------------------------------------------------

/// The masks of one frame. `lidar` is unset when the frame has no scan.
struct FrameMasks {
  RoadMask osm_direct;
  RoadMask osm_refined;
  RoadMask osm_candidates;
  RoadMask grabcut;
  RoadMask lanemark;
  std::optional<RoadMask> lidar;
  RoadMask fused;
  std::vector<std::string> warnings;

  // Debug products.
  SuperpixelMap superpixels;
  LaneMarkResult lanes;
};

/// Fusion with the configured weights; without Lidar the remaining four weights are
/// renormalized to sum to one.
inline RoadMask fuse_frame(const FrameMasks& m, const FusionWeights& w, std::vector<std::string>* warnings = nullptr) {
  if (m.lidar) {
    const std::array<RoadMask, 5> masks = {m.osm_refined, m.osm_candidates, m.grabcut, m.lanemark, *m.lidar};
    return fuse(std::span<const RoadMask, 5>(masks), w);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += w.w[i];
  if (!(sum > 0.0)) throw Error(Errc::bad_weights, "no Lidar scan and the other four weights are zero");
  const std::array<RoadMask, 4> masks = {m.osm_refined, m.osm_candidates, m.grabcut, m.lanemark};
  std::array<double, 4> ws{};
  for (std::size_t i = 0; i < 4; ++i) ws[i] = w.w[i] / sum;
  // Guard against rounding pushing the renormalized sum off one by more than the tolerance.
  ws[3] = std::max(0.0, 1.0 - ws[0] - ws[1] - ws[2]);
  if (warnings) warnings->push_back("no Lidar scan; fused the other four masks with renormalized weights");
  return fuse(std::span<const RoadMask>(masks), std::span<const double>(ws));
}

/// Everything the mask stage needs for one frame, computed without touching the output.
inline FrameMasks compute_frame_masks(const PipelineConfig& cfg, const OsmGraph& graph,
                                      const SpatialIndex& index, const std::string& frame) {
  const auto& p = cfg.paths;
  const auto image = read_rgb_png(p.images() / (frame + ".png"));
  auto cam = load_calibration(p.calib() / (frame + ".txt"));
  cam.image_w = image.width();
  cam.image_h = image.height();
  const auto poses = read_pose_file(p.pose() / (frame + ".txt"));
  if (poses.empty()) throw Error(Errc::io_error, "pose file for " + frame + " is empty");
  VehiclePose pose = poses.front();
  if (!index.empty()) {
    const auto& ref = index.entries().front().point;
    pose = detail::in_zone(pose, ref.zone, ref.hemisphere);
  }
  const std::uint64_t seed = detail::frame_seed(cfg.seed, frame);

  FrameMasks m;
  m.osm_direct = render_direct(graph, index, pose, cam, cfg.render);
  m.superpixels = superpixels(image, cfg.superpixels);
  m.osm_refined = relabel(m.superpixels, m.osm_direct);

  auto spec = cfg.candidates;
  spec.seed = seed;
  m.osm_candidates = candidates_mask(graph, index, pose, cam, spec, cfg.render);

  auto gc = cfg.grabcut;
  gc.seed = seed;
  auto gres = grabcut(image, gc);
  m.grabcut = std::move(gres.mask);
  for (auto& w : gres.warnings) m.warnings.push_back("grabcut: " + w);

  m.lanes = lane_marks(image, cfg.lanemark);
  m.lanemark = m.lanes.mask;
  if (!m.lanes.found) m.warnings.push_back("NoLaneFound: lane-mark mask is empty");

  const auto scan = p.velodyne() / (frame + ".bin");
  if (!p.velodyne().empty() && fs::exists(scan)) {
    m.lidar = lidar_mask(read_velodyne(scan), cam, cfg.ground);
  }
  m.fused = fuse_frame(m, cfg.weights, &m.warnings);
  return m;
}

inline void write_frame_masks(const fs::path& dir, const FrameMasks& m, bool debug) {
  fs::create_directories(dir);
  write_mask_png(dir / "osm_direct.png", m.osm_direct);
  write_mask_png(dir / "osm_refined.png", m.osm_refined);
  write_gray16_png(dir / "osm_candidates.png", quantize(m.osm_candidates));
  write_mask_png(dir / "grabcut.png", m.grabcut);
  write_mask_png(dir / "lanemark.png", m.lanemark);
  if (m.lidar) write_mask_png(dir / "lidar.png", *m.lidar);
  write_gray16_png(dir / "fused.png", quantize(m.fused));
  if (!debug) return;
  Grid<std::uint16_t> labels(m.superpixels.labels.width(), m.superpixels.labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<std::uint16_t>(std::clamp(m.superpixels.labels[i], 0, 65535));
  }
  write_gray16_png(dir / "debug_superpixels.png", labels);
  Grid<std::uint8_t> edges(m.lanes.edges.width(), m.lanes.edges.height());
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = m.lanes.edges[i] ? 255 : 0;
  write_gray_png(dir / "debug_lane_edges.png", edges);
}

/// Computes and writes the masks of every frame under output/masks/<frame>/. A frame that
/// fails leaves no directory behind; the others are unaffected. Failures are listed in
/// output/failures.txt and reported with exit code 2.
inline RunStatus run_masks(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate(Stage::masks);
  const auto parsed = load_osm_file(cfg.paths.osm);
  const auto frames = resolve_frames(cfg);

  // One index for the whole batch, in the zone of the first readable frame pose.
  SpatialIndex index;
  for (const auto& f : frames) {
    try {
      const auto poses = read_pose_file(cfg.paths.pose() / (f + ".txt"));
      if (poses.empty()) continue;
      index = SpatialIndex::build(parsed.graph, poses.front().utm.zone, poses.front().utm.hemisphere);
      break;
    } catch (const std::exception&) {
      continue;
    }
  }

  const fs::path root = cfg.paths.output / "masks";
  fs::create_directories(root);
  std::vector<std::string> logs(frames.size());
  std::vector<std::optional<std::string>> errors(frames.size());
  detail::parallel_for(frames.size(), cfg.jobs, [&](std::size_t i) {
    const auto& frame = frames[i];
    const fs::path dir = root / frame;
    std::ostringstream line;
    try {
      const auto m = compute_frame_masks(cfg, parsed.graph, index, frame);
      fs::remove_all(dir);
      write_frame_masks(dir, m, cfg.debug);
      if (cfg.debug) write_rgb_png(dir / "debug_lane_overlay.png", lane_debug_overlay(read_rgb_png(cfg.paths.images() / (frame + ".png")), m.lanes));
      line << frame << ": ok" << (m.lidar ? "" : " (no lidar)") << '\n';
      for (const auto& w : m.warnings) line << "  warning: " << w << '\n';
    } catch (const std::exception& e) {
      std::error_code ec;
      fs::remove_all(dir, ec);
      errors[i] = e.what();
      line << frame << ": FAILED " << e.what() << '\n';
    }
    logs[i] = line.str();
  });

  RunStatus status;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    log << logs[i];
    if (errors[i]) status.failures.push_back(frames[i] + ": " + *errors[i]);
  }
  const fs::path summary = cfg.paths.output / "failures.txt";
  if (status.failures.empty()) {
    fs::remove(summary);
  } else {
    std::string text;
    for (const auto& f : status.failures) text += f + '\n';
    detail::write_text(summary, text);
    status.exit_code = kExitPartial;
  }
  log << "masks: " << frames.size() - status.failures.size() << " of " << frames.size() << " frames written\n";
  return status;
}

// --- eval -----------------------------------------------------------------------------

struct RowSpec {
  std::string_view name;
  std::string_view file;
  std::string_view key;  // used in pr_<key>_<cat>.dat and per_frame.csv
  bool confidence;
};

inline constexpr std::array<RowSpec, 7> kRowSpecs = {{
    {"OSM direct", "osm_direct.png", "osm_direct", false},
    {"OSM refined", "osm_refined.png", "osm_refined", false},
    {"OSM candidates", "osm_candidates.png", "osm_candidates", true},
    {"GrabCut", "grabcut.png", "grabcut", false},
    {"Lane marks", "lanemark.png", "lanemark", false},
    {"Lidar", "lidar.png", "lidar", false},
    {"Combined", "fused.png", "combined", true},
}};

/// Lower-case frame prefix of a category: um, umm or uu.
inline std::string category_prefix(Category c) {
  std::string s(category_name(c));
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

/// Ground truth of a KITTI frame `<cat>_<num>`: gt_image_2/<cat>_road_<num>.png, or
/// gt_image_2/<frame>.png when that does not exist.
inline fs::path gt_path(const fs::path& gt_dir, const std::string& frame) {
  const auto us = frame.find('_');
  if (us != std::string::npos) {
    const auto p = gt_dir / (frame.substr(0, us) + "_road_" + frame.substr(us + 1) + ".png");
    if (fs::exists(p)) return p;
  }
  return gt_dir / (frame + ".png");
}

namespace detail {

using SparseHistogram = std::map<std::uint16_t, std::pair<std::uint64_t, std::uint64_t>>;

struct FrameEval {
  Category category = Category::um;
  std::array<std::optional<Counts>, 7> counts;            // binary rows
  std::array<std::optional<SparseHistogram>, 7> hist;     // confidence rows
  std::string error;
  Errc error_code = Errc::io_error;
};

inline SparseHistogram sparse_histogram(const Grid<std::uint16_t>& q, const RoadMask& gt) {
  if (!gt.values.same_shape(q)) throw Error(Errc::shape_mismatch, "confidence and ground truth differ in size");
  SparseHistogram h;
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto& c = h[q[i]];
    if (gt.values[i] > 0.5) ++c.first;
    else ++c.second;
  }
  return h;
}

inline Counts counts_at(const SparseHistogram& h, double t) {
  const auto level = quantize_level(t);
  Counts c;
  for (const auto& [q, pn] : h) {
    if (q > level) {
      c.tp += pn.first;
      c.fp += pn.second;
    } else {
      c.fn += pn.first;
    }
  }
  return c;
}

inline FrameEval eval_frame(const PipelineConfig& cfg, const std::string& frame, Category cat) {
  FrameEval out;
  out.category = cat;
  const auto gpath = gt_path(cfg.paths.gt(), frame);
  if (!fs::exists(gpath)) {
    out.error = "MissingGt: " + gpath.string();
    out.error_code = Errc::missing_gt;
    return out;
  }
  try {
    const auto gt = decode_gt(read_rgb_png(gpath), cfg.gt_rule);
    const fs::path dir = cfg.paths.output / "masks" / frame;
    for (std::size_t r = 0; r < kRowSpecs.size(); ++r) {
      const auto& spec = kRowSpecs[r];
      const fs::path f = dir / spec.file;
      if (!fs::exists(f)) continue;
      if (spec.confidence) {
        out.hist[r] = sparse_histogram(read_gray16_png(f), gt);
      } else {
        const auto pred = read_mask_png(f, MaskKind::binary);
        out.counts[r] = count_pixels(pred, gt);
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace detail

struct EvalSummary {
  ResultTable table;
  std::map<std::string, std::map<Category, PrSweep>> sweeps;  // confidence rows, by key
  std::size_t frames = 0;
  std::size_t missing_gt = 0;
  std::size_t uncategorized = 0;
};

/// Per-category micro-averaged P/R/F1 of every mask source. Confidence rows are scored at
/// the pinned threshold, or else at the argmax-F1 point of their category sweep. Writes
/// report.txt, per_frame.csv and pr_<source>_<cat>.dat to the output directory.
inline RunStatus run_eval(const PipelineConfig& cfg, std::ostream& log, EvalSummary* summary_out = nullptr) {
  cfg.validate(Stage::eval);
  const fs::path root = cfg.paths.output / "masks";
  std::vector<std::string> frames = cfg.frames;
  if (frames.empty()) {
    if (!cfg.paths.images().empty() && fs::is_directory(cfg.paths.images())) {
      frames = detail::list_frames(cfg.paths.images());
    } else {
      for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) frames.push_back(e.path().filename().string());
      }
      std::sort(frames.begin(), frames.end());
    }
  }

  EvalSummary summary;
  RunStatus status;
  std::vector<std::optional<detail::FrameEval>> evals(frames.size());
  std::vector<std::string> logs(frames.size());
  detail::parallel_for(frames.size(), cfg.jobs, [&](std::size_t i) {
    const auto& frame = frames[i];
    const auto cat = category_of(frame);
    if (!cat) {
      logs[i] = frame + ": skipped, no um_/umm_/uu_ prefix\n";
      return;
    }
    if (!fs::is_directory(root / frame)) {
      logs[i] = frame + ": skipped, no masks\n";
      return;
    }
    evals[i] = detail::eval_frame(cfg, frame, *cat);
    if (!evals[i]->error.empty()) logs[i] = frame + ": skipped, " + evals[i]->error + "\n";
  });

  // Reduction in frame order; integer sums make it order-independent anyway.
  std::map<Category, std::array<Counts, 7>> binary;
  std::map<Category, std::array<std::optional<ConfidenceHistogram>, 7>> conf;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    log << logs[i];
    if (!evals[i]) {
      if (!category_of(frames[i])) ++summary.uncategorized;
      else status.failures.push_back(frames[i] + ": no masks");
      continue;
    }
    const auto& e = *evals[i];
    if (!e.error.empty()) {
      if (e.error_code == Errc::missing_gt) ++summary.missing_gt;
      else status.failures.push_back(frames[i] + ": " + e.error);
      continue;
    }
    ++summary.frames;
    auto& b = binary[e.category];
    auto& c = conf[e.category];
    for (std::size_t r = 0; r < kRowSpecs.size(); ++r) {
      if (e.counts[r]) {
        b[r] += *e.counts[r];
        summary.table.cells[std::string(kRowSpecs[r].name)];  // row present
      }
      if (e.hist[r]) {
        if (!c[r]) c[r].emplace();
        for (const auto& [q, pn] : *e.hist[r]) c[r]->add_level(q, pn.first, pn.second);
      }
    }
  }

  // Operating thresholds of the confidence rows.
  std::map<Category, std::array<double, 7>> op;
  for (auto& [cat, hists] : conf) {
    for (std::size_t r = 0; r < kRowSpecs.size(); ++r) {
      if (!hists[r]) continue;
      const auto& spec = kRowSpecs[r];
      auto sweep = hists[r]->sweep(cfg.sweep_step);
      const double t = cfg.threshold.value_or(sweep.operating_point().t);
      op[cat][r] = t;
      summary.table.cells[std::string(spec.name)][cat] = score(hists[r]->counts_at(t), cat);
      summary.table.thresholds[std::string(spec.name)][cat] = t;
      detail::write_text(cfg.paths.output / ("pr_" + std::string(spec.key) + "_" + category_prefix(cat) + ".dat"),
                         format_pr_dat(sweep));
      summary.sweeps[std::string(spec.key)][cat] = std::move(sweep);
    }
  }
  for (const auto& [cat, counts] : binary) {
    for (std::size_t r = 0; r < kRowSpecs.size(); ++r) {
      if (kRowSpecs[r].confidence) continue;
      auto it = summary.table.cells.find(std::string(kRowSpecs[r].name));
      if (it == summary.table.cells.end()) continue;
      // Only categories where at least one frame had this mask.
      bool seen = false;
      for (std::size_t i = 0; i < frames.size() && !seen; ++i) {
        seen = evals[i] && evals[i]->error.empty() && evals[i]->category == cat && evals[i]->counts[r].has_value();
      }
      if (seen) it->second[cat] = score(counts[r], cat);
    }
  }
  for (const auto& spec : kRowSpecs) {
    if (summary.table.cells.contains(std::string(spec.name))) summary.table.rows.emplace_back(spec.name);
  }

  std::ostringstream csv;
  csv << "frame,category,source,threshold,tp,fp,fn,precision,recall,f1\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!evals[i] || !evals[i]->error.empty()) continue;
    const auto& e = *evals[i];
    for (std::size_t r = 0; r < kRowSpecs.size(); ++r) {
      std::optional<Counts> c = e.counts[r];
      std::string t;
      if (e.hist[r]) {
        const double th = op[e.category][r];
        c = detail::counts_at(*e.hist[r], th);
        t = format_number(th);
      }
      if (!c) continue;
      const auto s = score(*c, e.category);
      csv << frames[i] << ',' << category_name(e.category) << ',' << kRowSpecs[r].key << ',' << t << ','
          << c->tp << ',' << c->fp << ',' << c->fn << ',' << format_number(s.precision) << ','
          << format_number(s.recall) << ',' << format_number(s.f1) << '\n';
    }
  }
  detail::write_text(cfg.paths.output / "per_frame.csv", csv.str());

  std::ostringstream report;
  report << format_table(summary.table);
  report << "\nFrames evaluated: " << summary.frames << "\nMissing ground truth: " << summary.missing_gt
         << "\nUncategorized frames: " << summary.uncategorized
         << "\nFailed frames: " << status.failures.size() << '\n';
  detail::write_text(cfg.paths.output / "report.txt", report.str());
  log << report.str();

  if (!status.failures.empty() || summary.missing_gt > 0) status.exit_code = kExitPartial;
  if (summary_out) *summary_out = std::move(summary);
  return status;
}

}  // namespace osmroad
