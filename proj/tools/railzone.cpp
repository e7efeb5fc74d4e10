#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "railzone/commands.hpp"

namespace fs = std::filesystem;
using railzone::RunConfig;

namespace {

// Flag values land in the same JSON document the config file provides, so
// both go through one parser and flags win.
struct CommonFlags {
  std::string config;
  std::string out;
  bool quiet = false;
  std::string class_table;
  std::vector<double> zones;
  std::optional<int> patch_size;
  std::optional<int> closing_kernel;
  std::optional<int> eval_closing_kernel;
  std::optional<int> min_gauge_width;
  std::optional<int> demotion_levels;
  std::optional<double> gauge_mm;
  std::optional<bool> track_red;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--quiet", f.quiet, "suppress stdout output");
  cmd->add_option("--class-table", f.class_table, "class table JSON");
  cmd->add_option("--zones", f.zones, "red orange yellow distances in mm")->expected(3);
  cmd->add_option("--patch-size", f.patch_size, "small-patch side L for metrics (0 disables)");
  cmd->add_option("--closing-kernel", f.closing_kernel, "closing kernel before assessment");
  cmd->add_option("--eval-closing-kernel", f.eval_closing_kernel, "closing kernel on predictions before scoring");
  cmd->add_option("--min-gauge-width", f.min_gauge_width, "narrowest run used as a gauge sample, px");
  cmd->add_option("--demotion-levels", f.demotion_levels, "levels stationary hazards are demoted");
  cmd->add_option("--gauge-mm", f.gauge_mm, "real track gauge in mm");
  cmd->add_option("--track-red", f.track_red, "paint track pixels red (true/false)");
}

nlohmann::json read_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw railzone::Error("cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw railzone::Error("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw railzone::Error("config " + path + ": expected a JSON object");
  // Paths inside the file are relative to the file.
  const fs::path base = fs::absolute(path).parent_path();
  for (const char* key : {"class_table", "out"})
    if (doc.contains(key) && doc[key].is_string()) {
      const fs::path p = doc[key].get<std::string>();
      if (p.is_relative()) doc[key] = (base / p).string();
    }
  return doc;
}

RunConfig resolve(const CommonFlags& f) {
  nlohmann::json doc = read_config(f.config);
  if (!f.out.empty()) doc["out"] = f.out;
  if (f.quiet) doc["quiet"] = true;
  if (!f.class_table.empty()) doc["class_table"] = f.class_table;
  if (!f.zones.empty()) doc["zones_mm"] = f.zones;
  if (f.patch_size) doc["patch_size"] = *f.patch_size;
  if (f.closing_kernel) doc["closing_kernel"] = *f.closing_kernel;
  if (f.eval_closing_kernel) doc["eval_closing_kernel"] = *f.eval_closing_kernel;
  if (f.min_gauge_width) doc["min_gauge_width"] = *f.min_gauge_width;
  if (f.demotion_levels) doc["demotion_levels"] = *f.demotion_levels;
  if (f.gauge_mm) doc["gauge_mm"] = *f.gauge_mm;
  if (f.track_red) doc["include_track_in_red"] = *f.track_red;
  return RunConfig::from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rail-gauge calibrated critical zones and intrusion reports"};
  app.require_subcommand(1);
  CommonFlags flags;

  railzone::AssessInputs assess_in;
  std::string mask, dets, image;
  auto* assess = app.add_subcommand("assess", "zones and verdicts for one mask + detections");
  assess->add_option("mask", mask, "label mask PNG")->required()->check(CLI::ExistingFile);
  assess->add_option("detections", dets, "detections JSONL")->required()->check(CLI::ExistingFile);
  assess->add_option("--image", image, "RGB frame for the overlay background")->check(CLI::ExistingFile);
  assess->add_flag("--debug", assess_in.debug, "also write gauge.json and boundaries.json");
  add_common(assess, flags);

  std::string pred_dir, gt_dir;
  auto* eval_seg = app.add_subcommand("eval-seg", "patch-filtered segmentation IoU / precision");
  eval_seg->add_option("pred_dir", pred_dir)->required();
  eval_seg->add_option("gt_dir", gt_dir)->required();
  add_common(eval_seg, flags);

  std::string pred_path, gt_path;
  auto* eval_det = app.add_subcommand("eval-det", "detection mAP50 and box IoU");
  eval_det->add_option("pred", pred_path)->required()->check(CLI::ExistingFile);
  eval_det->add_option("gt", gt_path)->required()->check(CLI::ExistingFile);
  add_common(eval_det, flags);

  std::string scene;
  auto* synth = app.add_subcommand("synth", "render a synthetic scene with analytic truth");
  synth->add_option("scene", scene, "scene spec JSON")->required()->check(CLI::ExistingFile);
  add_common(synth, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : railzone::kExitError;
  }

  RunConfig config;
  try {
    config = resolve(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return railzone::kExitError;
  }

  if (*assess) {
    assess_in.mask = mask;
    assess_in.detections = dets;
    if (!image.empty()) assess_in.image = image;
    return railzone::cmd_assess(assess_in, config, std::cout, std::cerr);
  }
  if (*eval_seg) return railzone::cmd_eval_seg(pred_dir, gt_dir, config, std::cout, std::cerr);
  if (*eval_det) return railzone::cmd_eval_det(pred_path, gt_path, config, std::cout, std::cerr);
  return railzone::cmd_synth(scene, config, std::cout, std::cerr);
}
