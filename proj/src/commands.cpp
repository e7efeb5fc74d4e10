#include "railzone/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <vector>

#include "railzone/synth_oracle.hpp"

namespace railzone {
namespace {

namespace fs = std::filesystem;

fs::path out_dir(const RunConfig& config) {
  fs::path dir = config.output_dir.empty() ? fs::path(".") : config.output_dir;
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<Detection> read_detection_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return parse_detection_lines(in, nullptr);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::set<std::string> png_names(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") names.insert(e.path().filename().string());
  return names;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int cmd_assess(const AssessInputs& in, const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ClassTable table = ClassTable::load(config.class_table_path);
    const MaskLoadResult loaded = load_mask(in.mask, table);
    const DetectionSet dets =
        load_detections(in.detections, table, loaded.mask.width(), loaded.mask.height());
    std::optional<RgbImage> background;
    if (in.image) background = read_png_rgb(*in.image);

    const Assessment a = assess(loaded.mask, dets, table, config);
    const fs::path dir = out_dir(config);
    const std::string report = dump_fixed(assessment_report(a, config, loaded.remap_count));
    write_file_atomic(dir / "report.json", report);
    write_file_atomic(dir / "zones.png", encode_png_gray(a.zones.raster_image()));
    const RgbImage overlay = render_overlay(a.mask, a.zones, dets, a.report, background ? &*background : nullptr);
    write_file_atomic(dir / "overlay.png", encode_png_rgb(overlay));
    if (in.debug) {
      write_file_atomic(dir / "gauge.json", dump_fixed(a.profile.to_json()));
      write_file_atomic(dir / "boundaries.json", dump_fixed(a.zones.boundaries_json()));
    }
    if (loaded.remap_count > 0 && !config.quiet)
      err << "warning: " << loaded.remap_count << " mask pixels had unknown class ids and were set to void\n";
    if (!config.quiet) out << report;
    return a.report.max_criticality == Criticality::Red ? kExitRedAlarm : kExitOk;
  });
}

int cmd_eval_seg(const fs::path& pred_dir, const fs::path& gt_dir, const RunConfig& config, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const ClassTable table = ClassTable::load(config.class_table_path);
    const auto pred_names = png_names(pred_dir);
    const auto gt_names = png_names(gt_dir);
    std::vector<std::string> unmatched;
    std::set_symmetric_difference(pred_names.begin(), pred_names.end(), gt_names.begin(), gt_names.end(),
                                  std::back_inserter(unmatched));
    if (!unmatched.empty()) {
      err << "error: unmatched mask files:\n";
      for (const auto& name : unmatched)
        err << "  " << name << (pred_names.count(name) ? " (prediction only)" : " (ground truth only)") << "\n";
      return kExitError;
    }
    if (pred_names.empty()) throw Error("no .png masks found in " + pred_dir.string());

    const PatchFilterConfig patches{config.patch_size};
    ConfusionCounts counts;
    for (const auto& name : pred_names) {
      LabelMask pred = filter_classes(load_mask(pred_dir / name, table).mask, table);
      const LabelMask gt = filter_classes(load_mask(gt_dir / name, table).mask, table);
      if (!pred.same_shape(gt)) throw Error(name + ": prediction and ground truth differ in size");
      if (config.eval_closing_kernel > 1) pred = close_mask(pred, config.eval_closing_kernel, table.void_id());
      counts.accumulate(pred, gt, patch_ignore_union(pred, gt, patches, table.void_id()));
    }
    const std::string report =
        dump_fixed(seg_score_json(seg_score(counts, table), table, pred_names.size(), config.patch_size));
    if (!config.output_dir.empty()) write_file_atomic(out_dir(config) / "report.json", report);
    out << report;
    return kExitOk;
  });
}

int cmd_eval_det(const fs::path& pred_path, const fs::path& gt_path, const RunConfig& config, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto pred = read_detection_file(pred_path);
    const auto gt = read_detection_file(gt_path);
    const std::string report = dump_fixed(det_score_json(det_map50(pred, gt)));
    if (!config.output_dir.empty()) write_file_atomic(out_dir(config) / "report.json", report);
    out << report;
    return kExitOk;
  });
}

int cmd_synth(const fs::path& spec_path, const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const synth::SceneSpec spec = synth::SceneSpec::from_json(read_json_file(spec_path));
    const synth::SceneTruth truth = synth::render_scene(spec);
    const fs::path dir = out_dir(config);
    synth::write_scene(spec, truth, dir);
    if (!config.quiet) out << "wrote scene to " << dir.string() << "\n";
    return kExitOk;
  });
}

}  // namespace railzone
