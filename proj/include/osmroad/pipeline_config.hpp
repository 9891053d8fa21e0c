#pragma once

// JSON configuration for the batch pipeline. Every object rejects unknown keys; relative
// paths are resolved against the directory holding the configuration file.
//
// {
//   "paths": {"osm", "data", "image_dir", "calib_dir", "velodyne_dir", "gt_dir",
//             "pose_dir", "poses", "dynamics", "output"},
//   "seed": 0, "jobs": 0, "frames": ["um_000000", ...], "debug": false,
//   "signed_curvature": false,
//   "attributes": {"default_lanes_two_way", "default_lanes_one_way",
//                  "default_speed_kmh": [6 values], "at_intersection_radius_m",
//                  "intersection_search_m", "turning_bend_deg"},
//   "render": {"radius_m", "lane_width_m", "near_m", "far_m", "miter_limit"},
//   "candidates": {"n", "dx", "dy", "dtheta", "distribution": "uniform" | "gaussian"},
//   "superpixels": {"k", "compactness", "iterations"},
//   "grabcut": {"gmm_components", "max_iters", "gamma", "convergence", "epsilon",
//               "bg_rect": [x0, y0, x1, y1], "fg_rect": [x0, y0, x1, y1]},
//   "lanemark": {"blur_sigma", "canny_low", "canny_high", "hough_rho", "hough_theta",
//                "hough_votes", "min_len", "max_gap", "horizon_frac", "min_abs_slope",
//                "degree", "roi_top_left", "roi_top_right"},
//   "ground": {"n_sectors", "bin_size", "max_slope_deg", "height_tol", "fill_radius",
//              "sensor_height"},
//   "weights": [osm_refined, osm_candidates, grabcut, lanemark, lidar],
//   "eval": {"threshold": "auto" | number, "sweep_step",
//            "gt_rule": {"mode": "exact_color" | "channel", "color": [r, g, b],
//                        "channel", "channel_min"}}
// }

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "osmroad/error.hpp"
#include "osmroad/pipeline.hpp"

namespace osmroad {

namespace detail {

using Json = nlohmann::json;

inline void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::config_error, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::config_error, "unknown key " + (where.empty() ? key : where + "." + key));
    }
  }
}

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void read_path(const Json& j, const char* key, const std::filesystem::path& base,
                      std::filesystem::path& out) {
  if (!j.contains(key)) return;
  std::filesystem::path p = j.at(key).get<std::string>();
  out = p.is_relative() && !base.empty() ? base / p : p;
}

inline PixelRect read_rect(const Json& j) {
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 4) throw Error(Errc::config_error, "rectangles are [x0, y0, x1, y1]");
  return {v[0], v[1], v[2], v[3]};
}

inline std::optional<double> read_threshold(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return std::nullopt;
    throw Error(Errc::config_error, "threshold must be a number or \"auto\"");
  }
  return j.get<double>();
}

}  // namespace detail

/// Overlays the keys present in `j` onto `cfg`.
inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j,
                              const std::filesystem::path& base = {}) {
  using detail::check_keys;
  using detail::read_key;
  try {
    check_keys(j, {"paths", "seed", "jobs", "frames", "debug", "signed_curvature", "attributes", "render",
                   "candidates", "superpixels", "grabcut", "lanemark", "ground", "weights", "eval"},
               "");
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, {"osm", "data", "image_dir", "calib_dir", "velodyne_dir", "gt_dir", "pose_dir", "poses",
                     "dynamics", "output"},
                 "paths");
      auto& d = cfg.paths;
      detail::read_path(p, "osm", base, d.osm);
      detail::read_path(p, "data", base, d.data);
      detail::read_path(p, "image_dir", base, d.image_dir);
      detail::read_path(p, "calib_dir", base, d.calib_dir);
      detail::read_path(p, "velodyne_dir", base, d.velodyne_dir);
      detail::read_path(p, "gt_dir", base, d.gt_dir);
      detail::read_path(p, "pose_dir", base, d.pose_dir);
      detail::read_path(p, "poses", base, d.poses);
      detail::read_path(p, "dynamics", base, d.dynamics);
      detail::read_path(p, "output", base, d.output);
    }
    read_key(j, "seed", cfg.seed);
    read_key(j, "jobs", cfg.jobs);
    read_key(j, "frames", cfg.frames);
    read_key(j, "debug", cfg.debug);
    read_key(j, "signed_curvature", cfg.signed_curvature);

    if (j.contains("attributes")) {
      const auto& a = j.at("attributes");
      check_keys(a, {"default_lanes_two_way", "default_lanes_one_way", "default_speed_kmh",
                     "at_intersection_radius_m", "intersection_search_m", "turning_bend_deg"},
                 "attributes");
      auto& c = cfg.render.attributes;
      read_key(a, "default_lanes_two_way", c.default_lanes_two_way);
      read_key(a, "default_lanes_one_way", c.default_lanes_one_way);
      read_key(a, "default_speed_kmh", c.default_speed_kmh);
      read_key(a, "at_intersection_radius_m", c.at_intersection_radius_m);
      read_key(a, "intersection_search_m", c.intersection_search_m);
      read_key(a, "turning_bend_deg", c.turning_bend_deg);
    }
    if (j.contains("render")) {
      const auto& r = j.at("render");
      check_keys(r, {"radius_m", "lane_width_m", "near_m", "far_m", "miter_limit"}, "render");
      read_key(r, "radius_m", cfg.render.radius_m);
      read_key(r, "lane_width_m", cfg.render.lane_width_m);
      read_key(r, "near_m", cfg.render.near_m);
      read_key(r, "far_m", cfg.render.far_m);
      read_key(r, "miter_limit", cfg.render.miter_limit);
    }
    if (j.contains("candidates")) {
      const auto& c = j.at("candidates");
      check_keys(c, {"n", "dx", "dy", "dtheta", "distribution"}, "candidates");
      read_key(c, "n", cfg.candidates.n);
      read_key(c, "dx", cfg.candidates.dx);
      read_key(c, "dy", cfg.candidates.dy);
      read_key(c, "dtheta", cfg.candidates.dtheta);
      if (c.contains("distribution")) {
        const auto d = c.at("distribution").get<std::string>();
        if (d == "uniform") cfg.candidates.distribution = CandidateDistribution::uniform;
        else if (d == "gaussian") cfg.candidates.distribution = CandidateDistribution::gaussian;
        else throw Error(Errc::config_error, "candidates.distribution must be uniform or gaussian");
      }
    }
    if (j.contains("superpixels")) {
      const auto& s = j.at("superpixels");
      check_keys(s, {"k", "compactness", "iterations"}, "superpixels");
      read_key(s, "k", cfg.superpixels.k);
      read_key(s, "compactness", cfg.superpixels.compactness);
      read_key(s, "iterations", cfg.superpixels.iterations);
    }
    if (j.contains("grabcut")) {
      const auto& g = j.at("grabcut");
      check_keys(g, {"gmm_components", "max_iters", "gamma", "convergence", "epsilon", "bg_rect", "fg_rect"},
                 "grabcut");
      read_key(g, "gmm_components", cfg.grabcut.gmm_components);
      read_key(g, "max_iters", cfg.grabcut.max_iters);
      read_key(g, "gamma", cfg.grabcut.gamma);
      read_key(g, "convergence", cfg.grabcut.convergence);
      read_key(g, "epsilon", cfg.grabcut.epsilon);
      if (g.contains("bg_rect")) cfg.grabcut.bg_rect = detail::read_rect(g.at("bg_rect"));
      if (g.contains("fg_rect")) cfg.grabcut.fg_rect = detail::read_rect(g.at("fg_rect"));
    }
    if (j.contains("lanemark")) {
      const auto& l = j.at("lanemark");
      check_keys(l, {"blur_sigma", "canny_low", "canny_high", "hough_rho", "hough_theta", "hough_votes", "min_len",
                     "max_gap", "horizon_frac", "min_abs_slope", "degree", "roi_top_left", "roi_top_right"},
                 "lanemark");
      auto& c = cfg.lanemark;
      read_key(l, "blur_sigma", c.blur_sigma);
      read_key(l, "canny_low", c.canny_low);
      read_key(l, "canny_high", c.canny_high);
      read_key(l, "hough_rho", c.hough_rho);
      read_key(l, "hough_theta", c.hough_theta);
      read_key(l, "hough_votes", c.hough_votes);
      read_key(l, "min_len", c.min_len);
      read_key(l, "max_gap", c.max_gap);
      read_key(l, "horizon_frac", c.horizon_frac);
      read_key(l, "min_abs_slope", c.min_abs_slope);
      read_key(l, "degree", c.degree);
      read_key(l, "roi_top_left", c.roi_top_left);
      read_key(l, "roi_top_right", c.roi_top_right);
    }
    if (j.contains("ground")) {
      const auto& g = j.at("ground");
      check_keys(g, {"n_sectors", "bin_size", "max_slope_deg", "height_tol", "fill_radius", "sensor_height"},
                 "ground");
      auto& c = cfg.ground;
      read_key(g, "n_sectors", c.n_sectors);
      read_key(g, "bin_size", c.bin_size);
      read_key(g, "max_slope_deg", c.max_slope_deg);
      read_key(g, "height_tol", c.height_tol);
      read_key(g, "fill_radius", c.fill_radius);
      read_key(g, "sensor_height", c.sensor_height);
    }
    if (j.contains("weights")) {
      const auto w = j.at("weights").get<std::vector<double>>();
      if (w.size() != 5) throw Error(Errc::config_error, "weights needs 5 values");
      std::copy(w.begin(), w.end(), cfg.weights.w.begin());
    }
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      check_keys(e, {"threshold", "sweep_step", "gt_rule"}, "eval");
      if (e.contains("threshold")) cfg.threshold = detail::read_threshold(e.at("threshold"));
      read_key(e, "sweep_step", cfg.sweep_step);
      if (e.contains("gt_rule")) {
        const auto& g = e.at("gt_rule");
        check_keys(g, {"mode", "color", "channel", "channel_min"}, "eval.gt_rule");
        if (g.contains("mode")) {
          const auto m = g.at("mode").get<std::string>();
          if (m == "exact_color") cfg.gt_rule.mode = GtRule::Mode::exact_color;
          else if (m == "channel") cfg.gt_rule.mode = GtRule::Mode::channel;
          else throw Error(Errc::config_error, "eval.gt_rule.mode must be exact_color or channel");
        }
        if (g.contains("color")) {
          const auto c = g.at("color").get<std::vector<int>>();
          if (c.size() != 3) throw Error(Errc::config_error, "eval.gt_rule.color needs 3 values");
          for (std::size_t i = 0; i < 3; ++i) {
            if (c[i] < 0 || c[i] > 255) throw Error(Errc::config_error, "color components are 0..255");
            cfg.gt_rule.color[i] = static_cast<std::uint8_t>(c[i]);
          }
        }
        read_key(g, "channel", cfg.gt_rule.channel);
        read_key(g, "channel_min", cfg.gt_rule.channel_min);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, e.what());
  }
}

inline PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_error, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_error, path.string() + ": " + e.what());
  }
  apply_config_json(cfg, j, path.parent_path());
  return cfg;
}

/// "w1,w2,w3,w4,w5" in fusion order.
inline FusionWeights parse_weights(std::string_view text) {
  FusionWeights w;
  std::size_t i = 0;
  while (true) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    if (i == w.w.size()) throw Error(Errc::config_error, "--weights takes 5 values");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(Errc::config_error, "bad weight '" + std::string(item) + "'");
    }
    w.w[i++] = v;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (i != w.w.size()) throw Error(Errc::config_error, "--weights takes 5 values");
  return w;
}

/// "auto" or a number in [0, 1].
inline std::optional<double> parse_threshold(std::string_view text) {
  if (text == "auto") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0 && v <= 1.0)) {
    throw Error(Errc::config_error, "--threshold takes a number in [0, 1] or auto");
  }
  return v;
}

}  // namespace osmroad
