#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "railzone/json_format.hpp"
#include "railzone/mask_post.hpp"
#include "railzone/png_io.hpp"
#include "railzone/rail_gauge.hpp"
#include "railzone/scene_io.hpp"
#include "railzone/violation.hpp"
#include "railzone/zone_assessor.hpp"

namespace railzone {

/// Class table shipped with the project, used when no other table is configured.
std::filesystem::path default_class_table_path();

/// Settings shared by the commands. Built from one JSON document; command
/// line flags are merged into that document before parsing.
struct RunConfig {
  std::filesystem::path class_table_path;
  ZoneSpec zones;
  int patch_size = 12;
  /// Closing applied to masks before assessment.
  int closing_kernel = 3;
  /// Closing applied to predicted masks before segmentation scoring (1 = off).
  int eval_closing_kernel = 1;
  int min_gauge_width = 8;
  int demotion_levels = 1;
  double gauge_mm = kStandardGaugeMm;
  std::filesystem::path output_dir;
  bool quiet = false;

  /// Relative paths resolve against `base_dir` (the config file's directory).
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  void validate() const;
};

struct Assessment {
  LabelMask mask;  // filtered and closed
  TrackRuns runs;
  GaugeProfile profile;
  CriticalZoneMap zones;
  ViolationReport report;
};

/// Filter classes, close, measure the gauge, build zones and classify.
Assessment assess(const LabelMask& mask, const DetectionSet& detections, const ClassTable& table,
                  const RunConfig& config);

OrderedJson assessment_report(const Assessment& assessment, const RunConfig& config, std::size_t remapped_pixels);

/// Mask palette (or `background`) tinted by zone at alpha 0.35, with each
/// detection outlined 2 px wide in its criticality colour.
RgbImage render_overlay(const LabelMask& mask, const CriticalZoneMap& zones, const DetectionSet& detections,
                        const ViolationReport& report, const RgbImage* background = nullptr);

Rgb zone_color(ZoneLevel z);
Rgb criticality_color(Criticality c);

OrderedJson seg_score_json(const SegScore& score, const ClassTable& table, std::size_t images, int patch_size);
OrderedJson det_score_json(const DetScore& score);

}  // namespace railzone
