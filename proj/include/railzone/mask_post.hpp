#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "railzone/grid.hpp"
#include "railzone/scene_io.hpp"

namespace railzone {

struct PatchFilterConfig {
  /// Side of the square a component's bounding box must fit in to be
  /// ignored. 0 disables the filter.
  int patch_size = 12;
};

struct PatchFilterResult {
  BinaryGrid ignore;
  std::size_t ignored_components = 0;
};

/// Per-class binary closing with a kernel x kernel square, classes processed
/// in ascending id order onto a copy (higher ids win conflicts). Void is not
/// closed. Pixels outside the image never contribute to either pass.
LabelMask close_mask(const LabelMask& mask, int kernel, int void_id);

/// Marks 4-connected same-class components (void excluded) whose bounding
/// box fits inside a patch_size x patch_size square.
PatchFilterResult suppress_small_patches(const LabelMask& mask, const PatchFilterConfig& cfg, int void_id);

/// Replaces ignored pixels by void, for rendering.
LabelMask scrub_patches(const LabelMask& mask, const BinaryGrid& ignore, int void_id);

/// Pixel counts behind the segmentation scores; additive across images.
struct ConfusionCounts {
  std::map<int, std::size_t> intersection;
  std::map<int, std::size_t> predicted;
  std::map<int, std::size_t> truth;

  void accumulate(const LabelMask& pred, const LabelMask& gt, const BinaryGrid& ignore);
  ConfusionCounts& operator+=(const ConfusionCounts& other);
};

struct SegScore {
  /// nullopt where the class never occurs in the non-ignored pixels.
  std::map<int, std::optional<double>> per_class_iou;
  /// Pixel precision TP / (TP + FP); nullopt where the class is never predicted.
  std::map<int, std::optional<double>> per_class_precision;
  double mean_iou = 0;
  double mean_precision = 0;
};

/// Scores every non-void class in the table from accumulated counts.
SegScore seg_score(const ConfusionCounts& counts, const ClassTable& table);

/// Per-class IoU and pixel precision of one mask pair, skipping `ignore` pixels.
SegScore seg_iou(const LabelMask& pred, const LabelMask& gt, const BinaryGrid& ignore, const ClassTable& table);

/// Ignore mask used for patch-filtered metrics: union of the small-patch
/// masks of prediction and ground truth.
BinaryGrid patch_ignore_union(const LabelMask& pred, const LabelMask& gt, const PatchFilterConfig& cfg,
                              int void_id);

double box_iou(const BoundingBox& a, const BoundingBox& b);

struct ClassDetScore {
  double ap50 = 0;
  double mean_iou = 0;
  std::size_t ground_truth = 0;
  std::size_t true_positives = 0;
};

struct DetScore {
  std::map<std::string, ClassDetScore> per_class;
  double mean_ap50 = 0;
  double mean_iou = 0;
};

/// AP at IoU 0.5 with greedy score-ordered matching and 101-point interpolated
/// precision. Boxes only match within the same image id. Means run over the
/// classes present in the ground truth.
DetScore det_map50(const std::vector<Detection>& pred, const std::vector<Detection>& gt);

/// 101-point interpolated AP from a precision/recall sequence.
double interpolated_ap101(const std::vector<double>& recall, const std::vector<double>& precision);

}  // namespace railzone
