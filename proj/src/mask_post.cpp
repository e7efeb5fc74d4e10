#include "railzone/mask_post.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

#include <opencv2/imgproc.hpp>

namespace railzone {
namespace {

// Non-owning view; OpenCV only reads from or writes into the grid buffer.
cv::Mat as_mat(const Grid<std::uint8_t>& g) {
  return cv::Mat(g.height(), g.width(), CV_8U, const_cast<std::uint8_t*>(g.data().data()));
}

std::set<int> present_classes(const LabelMask& mask, int void_id) {
  std::array<bool, 256> seen{};
  for (auto v : mask.data()) seen[v] = true;
  std::set<int> out;
  for (int c = 0; c < 256; ++c)
    if (seen[c] && c != void_id) out.insert(c);
  return out;
}

BinaryGrid class_plane(const LabelMask& mask, int c) {
  BinaryGrid out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = mask.data()[i] == c ? 255 : 0;
  return out;
}

}  // namespace

LabelMask close_mask(const LabelMask& mask, int kernel, int void_id) {
  if (kernel < 1 || kernel % 2 == 0)
    throw Error("closing kernel must be odd and >= 1, got " + std::to_string(kernel));
  LabelMask out = mask;
  if (kernel == 1) return out;
  const cv::Mat element = cv::getStructuringElement(cv::MORPH_RECT, cv::Size(kernel, kernel));
  for (int c : present_classes(mask, void_id)) {
    const BinaryGrid plane = class_plane(mask, c);
    cv::Mat closed;
    // The default constant border is neutral for both passes: it never
    // grows the dilation nor erodes pixels next to the image edge.
    cv::morphologyEx(as_mat(plane), closed, cv::MORPH_CLOSE, element);
    for (int y = 0; y < out.height(); ++y) {
      const auto* src = closed.ptr<std::uint8_t>(y);
      auto row = out.row(y);
      for (int x = 0; x < out.width(); ++x)
        if (src[x]) row[x] = static_cast<ClassId>(c);
    }
  }
  return out;
}

PatchFilterResult suppress_small_patches(const LabelMask& mask, const PatchFilterConfig& cfg, int void_id) {
  if (cfg.patch_size < 0) throw Error("patch size must be >= 0");
  PatchFilterResult result{BinaryGrid(mask.width(), mask.height()), 0};
  if (cfg.patch_size == 0 || mask.empty()) return result;

  for (int c : present_classes(mask, void_id)) {
    const BinaryGrid plane = class_plane(mask, c);
    cv::Mat labels, stats, centroids;
    const int n = cv::connectedComponentsWithStats(as_mat(plane), labels, stats, centroids, 4, CV_32S);
    std::vector<std::uint8_t> small(static_cast<std::size_t>(n), 0);
    for (int label = 1; label < n; ++label) {
      if (stats.at<int>(label, cv::CC_STAT_WIDTH) <= cfg.patch_size &&
          stats.at<int>(label, cv::CC_STAT_HEIGHT) <= cfg.patch_size) {
        small[static_cast<std::size_t>(label)] = 1;
        ++result.ignored_components;
      }
    }
    for (int y = 0; y < mask.height(); ++y) {
      const int* lab = labels.ptr<int>(y);
      auto row = result.ignore.row(y);
      for (int x = 0; x < mask.width(); ++x)
        if (small[static_cast<std::size_t>(lab[x])]) row[x] = 1;
    }
  }
  return result;
}

LabelMask scrub_patches(const LabelMask& mask, const BinaryGrid& ignore, int void_id) {
  if (!mask.same_shape(ignore)) throw Error("scrub_patches: dimension mismatch");
  LabelMask out = mask;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (ignore.data()[i]) out.data()[i] = static_cast<ClassId>(void_id);
  return out;
}

void ConfusionCounts::accumulate(const LabelMask& pred, const LabelMask& gt, const BinaryGrid& ignore) {
  if (!pred.same_shape(gt) || !pred.same_shape(ignore))
    throw Error("segmentation metrics: dimension mismatch between prediction, ground truth and ignore mask");
  std::array<std::size_t, 256> inter{}, p{}, g{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (ignore.data()[i]) continue;
    const auto a = pred.data()[i];
    const auto b = gt.data()[i];
    ++p[a];
    ++g[b];
    if (a == b) ++inter[a];
  }
  for (int c = 0; c < 256; ++c) {
    if (inter[c]) intersection[c] += inter[c];
    if (p[c]) predicted[c] += p[c];
    if (g[c]) truth[c] += g[c];
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  for (const auto& [c, n] : other.intersection) intersection[c] += n;
  for (const auto& [c, n] : other.predicted) predicted[c] += n;
  for (const auto& [c, n] : other.truth) truth[c] += n;
  return *this;
}

SegScore seg_score(const ConfusionCounts& counts, const ClassTable& table) {
  auto get = [](const std::map<int, std::size_t>& m, int c) -> double {
    const auto it = m.find(c);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  };
  SegScore score;
  double iou_sum = 0, prec_sum = 0;
  int iou_n = 0, prec_n = 0;
  for (const auto& e : table.entries()) {
    if (e.id == table.void_id()) continue;
    const double inter = get(counts.intersection, e.id);
    const double pred = get(counts.predicted, e.id);
    const double uni = pred + get(counts.truth, e.id) - inter;
    std::optional<double> iou, prec;
    if (uni > 0) {
      iou = inter / uni;
      iou_sum += *iou;
      ++iou_n;
    }
    if (pred > 0) {
      prec = inter / pred;
      prec_sum += *prec;
      ++prec_n;
    }
    score.per_class_iou[e.id] = iou;
    score.per_class_precision[e.id] = prec;
  }
  score.mean_iou = iou_n ? iou_sum / iou_n : 0.0;
  score.mean_precision = prec_n ? prec_sum / prec_n : 0.0;
  return score;
}

SegScore seg_iou(const LabelMask& pred, const LabelMask& gt, const BinaryGrid& ignore, const ClassTable& table) {
  ConfusionCounts counts;
  counts.accumulate(pred, gt, ignore);
  return seg_score(counts, table);
}

BinaryGrid patch_ignore_union(const LabelMask& pred, const LabelMask& gt, const PatchFilterConfig& cfg,
                              int void_id) {
  if (!pred.same_shape(gt)) throw Error("segmentation metrics: dimension mismatch between prediction and ground truth");
  BinaryGrid out = suppress_small_patches(pred, cfg, void_id).ignore;
  const BinaryGrid other = suppress_small_patches(gt, cfg, void_id).ignore;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] |= other.data()[i];
  return out;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double interpolated_ap101(const std::vector<double>& recall, const std::vector<double>& precision) {
  double sum = 0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double best = 0;
    for (std::size_t k = 0; k < recall.size(); ++k)
      if (recall[k] >= r) best = std::max(best, precision[k]);
    sum += best;
  }
  return sum / 101.0;
}

DetScore det_map50(const std::vector<Detection>& pred, const std::vector<Detection>& gt) {
  constexpr double kMatchIou = 0.5;
  std::set<std::string> classes;
  for (const auto& g : gt) classes.insert(g.class_name);

  DetScore score;
  for (const auto& cls : classes) {
    struct GtBox {
      const Detection* det;
      bool matched;
    };
    std::map<std::string, std::vector<GtBox>> by_image;
    std::size_t npos = 0;
    for (const auto& g : gt)
      if (g.class_name == cls) {
        by_image[g.image_id].push_back({&g, false});
        ++npos;
      }

    std::vector<const Detection*> ranked;
    for (const auto& p : pred)
      if (p.class_name == cls) ranked.push_back(&p);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Detection* a, const Detection* b) { return a->score > b->score; });

    std::vector<double> recall, precision;
    std::size_t tp = 0;
    double iou_sum = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      auto it = by_image.find(ranked[k]->image_id);
      GtBox* best = nullptr;
      double best_iou = -1;
      if (it != by_image.end()) {
        for (auto& g : it->second) {
          if (g.matched) continue;
          const double iou = box_iou(ranked[k]->bbox, g.det->bbox);
          if (iou > best_iou) {
            best_iou = iou;
            best = &g;
          }
        }
      }
      if (best && best_iou >= kMatchIou) {
        best->matched = true;
        ++tp;
        iou_sum += best_iou;
      }
      recall.push_back(static_cast<double>(tp) / static_cast<double>(npos));
      precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    }
    ClassDetScore cs;
    cs.ap50 = interpolated_ap101(recall, precision);
    cs.mean_iou = tp ? iou_sum / static_cast<double>(tp) : 0.0;
    cs.ground_truth = npos;
    cs.true_positives = tp;
    score.per_class[cls] = cs;
  }
  if (!score.per_class.empty()) {
    for (const auto& [_, cs] : score.per_class) {
      score.mean_ap50 += cs.ap50;
      score.mean_iou += cs.mean_iou;
    }
    score.mean_ap50 /= static_cast<double>(score.per_class.size());
    score.mean_iou /= static_cast<double>(score.per_class.size());
  }
  return score;
}

}  // namespace railzone
