#include "railzone/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace railzone {
namespace {

constexpr double kTintAlpha = 0.35;
constexpr int kOutlinePx = 2;

Rgb palette(int class_id) {
  if (class_id == ClassTable::kDefaultVoidId) return {0, 0, 0};
  const auto c = static_cast<unsigned>(class_id);
  return {static_cast<std::uint8_t>(60 + (c * 97u) % 140u), static_cast<std::uint8_t>(60 + (c * 57u) % 140u),
          static_cast<std::uint8_t>(60 + (c * 31u) % 140u)};
}

std::uint8_t blend(std::uint8_t base, std::uint8_t tint) {
  return static_cast<std::uint8_t>(std::lround((1.0 - kTintAlpha) * base + kTintAlpha * tint));
}

void require_range(bool ok, const char* field, const std::string& what) {
  if (!ok) throw Error(std::string("config.") + field + ": " + what);
}

}  // namespace

std::filesystem::path default_class_table_path() {
  return std::filesystem::path(RAILZONE_DATA_DIR) / "classes_default.json";
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error("config: expected a JSON object");
  RunConfig cfg;
  auto integer = [&](const char* key, int& dst) {
    if (!doc.contains(key) || doc[key].is_null()) return;
    require_range(doc[key].is_number_integer(), key, "must be an integer");
    dst = doc[key].get<int>();
  };
  auto path = [&](const char* key, std::filesystem::path& dst) {
    if (!doc.contains(key) || doc[key].is_null()) return;
    require_range(doc[key].is_string(), key, "must be a path string");
    std::filesystem::path p = doc[key].get<std::string>();
    dst = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  path("class_table", cfg.class_table_path);
  path("out", cfg.output_dir);
  integer("patch_size", cfg.patch_size);
  integer("closing_kernel", cfg.closing_kernel);
  integer("eval_closing_kernel", cfg.eval_closing_kernel);
  integer("min_gauge_width", cfg.min_gauge_width);
  integer("demotion_levels", cfg.demotion_levels);
  if (doc.contains("gauge_mm") && !doc["gauge_mm"].is_null()) {
    require_range(doc["gauge_mm"].is_number(), "gauge_mm", "must be a number");
    cfg.gauge_mm = doc["gauge_mm"].get<double>();
  }
  if (doc.contains("zones_mm") && !doc["zones_mm"].is_null()) {
    const auto& z = doc["zones_mm"];
    require_range(z.is_array() && z.size() == 3, "zones_mm", "must be an array of three distances");
    for (std::size_t i = 0; i < 3; ++i) {
      require_range(z[i].is_number(), "zones_mm", "entries must be numbers");
      cfg.zones.distances_mm[i] = z[i].get<double>();
    }
  }
  if (doc.contains("include_track_in_red") && !doc["include_track_in_red"].is_null()) {
    require_range(doc["include_track_in_red"].is_boolean(), "include_track_in_red", "must be a boolean");
    cfg.zones.include_track_in_red = doc["include_track_in_red"].get<bool>();
  }
  if (doc.contains("quiet") && doc["quiet"].is_boolean()) cfg.quiet = doc["quiet"].get<bool>();
  if (cfg.class_table_path.empty()) cfg.class_table_path = default_class_table_path();
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  require_range(std::filesystem::exists(class_table_path), "class_table",
                "file not found: " + class_table_path.string());
  try {
    zones.validate();
  } catch (const Error& e) {
    throw Error(std::string("config.zones_mm: ") + e.what());
  }
  require_range(patch_size >= 0, "patch_size", "must be >= 0");
  require_range(closing_kernel >= 1 && closing_kernel % 2 == 1, "closing_kernel", "must be odd and >= 1");
  require_range(eval_closing_kernel >= 1 && eval_closing_kernel % 2 == 1, "eval_closing_kernel",
                "must be odd and >= 1");
  require_range(min_gauge_width >= 1, "min_gauge_width", "must be >= 1");
  require_range(demotion_levels >= 0 && demotion_levels <= 3, "demotion_levels", "must be in [0, 3]");
  require_range(gauge_mm > 0 && std::isfinite(gauge_mm), "gauge_mm", "must be > 0");
}

Assessment assess(const LabelMask& mask, const DetectionSet& detections, const ClassTable& table,
                  const RunConfig& config) {
  if (!table.has_rail_track()) throw Error("class table has no rail_track class; nothing to measure");
  Assessment a;
  a.mask = close_mask(filter_classes(mask, table), config.closing_kernel, table.void_id());
  a.runs = extract_track_runs(a.mask, table);
  a.profile = build_gauge_profile(a.runs.runs, config.gauge_mm, config.min_gauge_width);
  a.zones = estimate_zones(a.mask, table, a.runs, a.profile, config.zones);
  a.report = classify(detections, a.zones, table, config.demotion_levels);
  return a;
}

OrderedJson assessment_report(const Assessment& a, const RunConfig& config, std::size_t remapped_pixels) {
  OrderedJson out = a.report.to_json();
  out["image"] = {{"width", a.mask.width()}, {"height", a.mask.height()}};
  out["zones_mm"] = {config.zones.distances_mm[0], config.zones.distances_mm[1], config.zones.distances_mm[2]};
  out["tracks"] = {{"components", a.runs.track_components},
                   {"split_rows", a.runs.split_count},
                   {"gauge_samples", a.profile.samples().size()},
                   {"uncalibrated", a.zones.uncalibrated_tracks}};
  out["remapped_pixels"] = remapped_pixels;
  return out;
}

Rgb zone_color(ZoneLevel z) {
  switch (z) {
    case ZoneLevel::Yellow: return {255, 255, 0};
    case ZoneLevel::Orange: return {255, 140, 0};
    case ZoneLevel::Red: return {255, 0, 0};
    case ZoneLevel::None: break;
  }
  return {0, 0, 0};
}

Rgb criticality_color(Criticality c) {
  switch (c) {
    case Criticality::Green: return {0, 200, 0};
    case Criticality::Yellow: return {255, 255, 0};
    case Criticality::Orange: return {255, 140, 0};
    case Criticality::Red: return {255, 0, 0};
  }
  return {0, 200, 0};
}

RgbImage render_overlay(const LabelMask& mask, const CriticalZoneMap& zones, const DetectionSet& detections,
                        const ViolationReport& report, const RgbImage* background) {
  if (!mask.same_shape(zones.raster)) throw Error("overlay: zone raster does not match the mask");
  if (background && !background->same_shape(mask)) throw Error("overlay: background image does not match the mask");

  RgbImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rgb px = background ? background->data()[i] : palette(mask.data()[i]);
    const ZoneLevel z = zones.raster.data()[i];
    if (z != ZoneLevel::None) {
      const Rgb tint = zone_color(z);
      px = {blend(px.r, tint.r), blend(px.g, tint.g), blend(px.b, tint.b)};
    }
    out.data()[i] = px;
  }

  for (const auto& v : report.verdicts) {
    const auto& box = detections.detections.at(v.detection_index).bbox;
    const int x0 = std::clamp(static_cast<int>(std::lround(box.x)), 0, out.width() - 1);
    const int y0 = std::clamp(static_cast<int>(std::lround(box.y)), 0, out.height() - 1);
    const int x1 = std::clamp(static_cast<int>(std::lround(box.x + box.w)), 0, out.width() - 1);
    const int y1 = std::clamp(static_cast<int>(std::lround(box.y + box.h)), 0, out.height() - 1);
    const Rgb color = criticality_color(v.criticality);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (x - x0 < kOutlinePx || x1 - x < kOutlinePx || y - y0 < kOutlinePx || y1 - y < kOutlinePx)
          out(x, y) = color;
  }
  return out;
}

OrderedJson seg_score_json(const SegScore& score, const ClassTable& table, std::size_t images, int patch_size) {
  auto opt = [](const std::optional<double>& v) -> OrderedJson { return v ? OrderedJson(*v) : OrderedJson(nullptr); };
  OrderedJson per_class = OrderedJson::object();
  for (const auto& [id, iou] : score.per_class_iou)
    per_class[table.name_of(id)] = {{"id", id}, {"iou", opt(iou)}, {"precision", opt(score.per_class_precision.at(id))}};
  return {{"per_class", per_class},
          {"mean_iou", score.mean_iou},
          {"mean_precision", score.mean_precision},
          {"precision_definition", "pixel precision TP/(TP+FP), mean over classes that were predicted"},
          {"images", images},
          {"patch_size", patch_size}};
}

OrderedJson det_score_json(const DetScore& score) {
  OrderedJson per_class = OrderedJson::object();
  for (const auto& [cls, cs] : score.per_class)
    per_class[cls] = {{"ap50", cs.ap50}, {"mean_iou", cs.mean_iou}, {"gt", cs.ground_truth}, {"tp", cs.true_positives}};
  return {{"per_class", per_class}, {"map50", score.mean_ap50}, {"mean_iou", score.mean_iou}};
}

}  // namespace railzone
