#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osmroad/pipeline.hpp"
#include "osmroad/pipeline_config.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string weights;
  std::string threshold;
  std::string data, osm, poses, dynamics, output;
  std::vector<std::string> frames;
  bool debug = false;
};

void add_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Random seed (per-frame seeds derive from it)");
  app->add_option("-j,--jobs", o.jobs, "Worker threads, 0 = all cores");
  app->add_option("--weights", o.weights, "Fusion weights w1,w2,w3,w4,w5 (refined, candidates, grabcut, lanemark, lidar)");
  app->add_option("--threshold", o.threshold, "Operating threshold for confidence masks, or auto");
  app->add_option("--data", o.data, "Dataset root in the KITTI road layout");
  app->add_option("--osm", o.osm, "OSM XML extract");
  app->add_option("--poses", o.poses, "Pose track for attributes");
  app->add_option("--dynamics", o.dynamics, "13-column dynamics file for features.csv");
  app->add_option("-o,--output", o.output, "Output directory");
  app->add_option("--frames", o.frames, "Frame ids to process (default: all images)")->delimiter(',');
  app->add_flag("--debug", o.debug, "Write debug images");
}

osmroad::PipelineConfig make_config(const Overrides& o) {
  osmroad::PipelineConfig cfg;
  if (!o.config.empty()) cfg = osmroad::load_config_file(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.weights.empty()) cfg.weights = osmroad::parse_weights(o.weights);
  if (!o.threshold.empty()) cfg.threshold = osmroad::parse_threshold(o.threshold);
  if (!o.data.empty()) cfg.paths.data = o.data;
  if (!o.osm.empty()) cfg.paths.osm = o.osm;
  if (!o.poses.empty()) cfg.paths.poses = o.poses;
  if (!o.dynamics.empty()) cfg.paths.dynamics = o.dynamics;
  if (!o.output.empty()) cfg.paths.output = o.output;
  if (!o.frames.empty()) cfg.frames = o.frames;
  if (o.debug) cfg.debug = true;
  return cfg;
}

int report(const osmroad::RunStatus& s) {
  for (const auto& f : s.failures) std::cerr << "failed: " << f << '\n';
  return s.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road scene attributes and drivable-space masks from OSM, images and Lidar"};
  app.require_subcommand(1);
  Overrides o;
  auto* attributes = app.add_subcommand("attributes", "Per-pose scenario attributes and feature vectors");
  auto* masks = app.add_subcommand("masks", "Per-frame road masks and their fusion");
  auto* eval = app.add_subcommand("eval", "Pixel-wise precision/recall/F1 against ground truth");
  auto* pipeline = app.add_subcommand("pipeline", "attributes (when poses are set), masks and eval in sequence");
  for (auto* sub : {attributes, masks, eval, pipeline}) add_options(sub, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : osmroad::kExitConfig;
  }

  osmroad::PipelineConfig cfg;
  try {
    cfg = make_config(o);
    if (pipeline->parsed()) {
      if (!cfg.paths.poses.empty()) cfg.validate(osmroad::Stage::attributes);
      cfg.validate(osmroad::Stage::masks);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return osmroad::kExitConfig;
  }

  try {
    if (attributes->parsed()) return report(osmroad::run_attributes(cfg, std::cout));
    if (masks->parsed()) return report(osmroad::run_masks(cfg, std::cout));
    if (eval->parsed()) return report(osmroad::run_eval(cfg, std::cout));
    int code = osmroad::kExitOk;
    if (!cfg.paths.poses.empty()) code = std::max(code, report(osmroad::run_attributes(cfg, std::cout)));
    code = std::max(code, report(osmroad::run_masks(cfg, std::cout)));
    if (!cfg.paths.gt().empty() && std::filesystem::is_directory(cfg.paths.gt())) {
      code = std::max(code, report(osmroad::run_eval(cfg, std::cout)));
    } else {
      std::cout << "eval skipped: no ground-truth directory\n";
    }
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return osmroad::kExitConfig;
  }
}
