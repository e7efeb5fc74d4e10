#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "railzone/pipeline.hpp"

namespace railzone {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRedAlarm = 2;

struct AssessInputs {
  std::filesystem::path mask;
  std::filesystem::path detections;
  /// Optional RGB frame drawn under the zone tint instead of the mask palette.
  std::optional<std::filesystem::path> image;
  /// Also write gauge.json and boundaries.json.
  bool debug = false;
};

/// Writes report.json, zones.png and overlay.png under config.output_dir.
/// Returns 2 when the worst verdict is red, 0 otherwise, 1 on any error.
int cmd_assess(const AssessInputs& in, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Scores every <name>.png in pred_dir against gt_dir/<name>.png with a
/// global confusion over all images.
int cmd_eval_seg(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir, const RunConfig& config,
                 std::ostream& out, std::ostream& err);

int cmd_eval_det(const std::filesystem::path& pred_path, const std::filesystem::path& gt_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

/// Renders a scene spec to mask.png, detections.jsonl, zones_truth.png and manifest.json.
int cmd_synth(const std::filesystem::path& spec_path, const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace railzone
