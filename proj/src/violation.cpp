#include "railzone/violation.hpp"

#include <algorithm>
#include <cmath>

namespace railzone {

std::string_view to_string(Criticality c) {
  switch (c) {
    case Criticality::Green: return "green";
    case Criticality::Yellow: return "yellow";
    case Criticality::Orange: return "orange";
    case Criticality::Red: return "red";
  }
  return "green";
}

std::array<SamplePoint, 12> sample_points(const BoundingBox& b) {
  auto px = [](double v) { return static_cast<int>(std::lround(v)); };
  const double x0 = b.x, x1 = b.x + b.w / 3.0, x2 = b.x + 2.0 * b.w / 3.0, x3 = b.x + b.w;
  const double y0 = b.y, y1 = b.y + b.h / 3.0, y2 = b.y + 2.0 * b.h / 3.0, y3 = b.y + b.h;
  using P = SamplePosition;
  return {{
      {px(x0), px(y0), P::TopLeft},
      {px(x1), px(y0), P::Top1},
      {px(x2), px(y0), P::Top2},
      {px(x3), px(y0), P::TopRight},
      {px(x3), px(y1), P::Right1},
      {px(x3), px(y2), P::Right2},
      {px(x3), px(y3), P::BottomRight},
      {px(x2), px(y3), P::Bottom2},
      {px(x1), px(y3), P::Bottom1},
      {px(x0), px(y3), P::BottomLeft},
      {px(x0), px(y2), P::Left2},
      {px(x0), px(y1), P::Left1},
  }};
}

Criticality criticality_for(HazardClass hazard, ZoneLevel raw_zone, int demotion_levels) {
  if (demotion_levels < 0 || demotion_levels > 3) throw Error("demotion levels must be in [0, 3]");
  int level = static_cast<int>(raw_zone);
  if (hazard != HazardClass::Movable) level = std::max(0, level - demotion_levels);
  return static_cast<Criticality>(level);
}

ViolationReport classify(const DetectionSet& detections, const CriticalZoneMap& zmap, const ClassTable& table,
                         int demotion_levels) {
  if (detections.image_width != zmap.raster.width() || detections.image_height != zmap.raster.height())
    throw Error("detections image size " + std::to_string(detections.image_width) + "x" +
                std::to_string(detections.image_height) + " does not match zone raster " +
                std::to_string(zmap.raster.width()) + "x" + std::to_string(zmap.raster.height()));
  ViolationReport report;
  for (std::size_t i = 0; i < detections.detections.size(); ++i) {
    const auto& det = detections.detections[i];
    Verdict v;
    v.detection_index = i;
    v.class_name = det.class_name;
    v.hazard = table.hazard_of(det.class_name);
    for (const auto& p : sample_points(det.bbox)) {
      const ZoneLevel z = zone_at(zmap, p.x, p.y);
      if (z == ZoneLevel::None) continue;
      v.violating_points.push_back({p, z});
      v.raw_zone = std::max(v.raw_zone, z);
    }
    v.criticality = criticality_for(v.hazard, v.raw_zone, demotion_levels);
    report.max_criticality = std::max(report.max_criticality, v.criticality);
    ++report.counts[static_cast<std::size_t>(v.criticality)];
    report.verdicts.push_back(std::move(v));
  }
  return report;
}

OrderedJson ViolationReport::to_json() const {
  auto verdict_array = OrderedJson::array();
  for (const auto& v : verdicts) {
    auto points = OrderedJson::array();
    for (const auto& vp : v.violating_points)
      points.push_back({vp.point.x, vp.point.y, std::string(to_string(vp.zone))});
    verdict_array.push_back({{"index", v.detection_index},
                             {"class", v.class_name},
                             {"hazard", std::string(to_string(v.hazard))},
                             {"raw_zone", std::string(to_string(v.raw_zone))},
                             {"criticality", std::string(to_string(v.criticality))},
                             {"points", points}});
  }
  OrderedJson counts_obj = OrderedJson::object();
  for (std::size_t c = 0; c < counts.size(); ++c)
    counts_obj[std::string(to_string(static_cast<Criticality>(c)))] = counts[c];
  return {{"verdicts", verdict_array}, {"max", std::string(to_string(max_criticality))}, {"counts", counts_obj}};
}

}  // namespace railzone
