#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "railzone/json_format.hpp"
#include "railzone/scene_io.hpp"
#include "railzone/zone_assessor.hpp"

namespace railzone {

enum class Criticality : std::uint8_t { Green = 0, Yellow = 1, Orange = 2, Red = 3 };

std::string_view to_string(Criticality c);

/// Perimeter positions, clockwise from the top-left corner.
enum class SamplePosition : std::uint8_t {
  TopLeft,
  Top1,
  Top2,
  TopRight,
  Right1,
  Right2,
  BottomRight,
  Bottom2,
  Bottom1,
  BottomLeft,
  Left2,
  Left1,
};

struct SamplePoint {
  int x = 0;
  int y = 0;
  SamplePosition position = SamplePosition::TopLeft;

  friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

/// Four corners plus the 1/3 and 2/3 points of every side, rounded to the
/// nearest pixel.
std::array<SamplePoint, 12> sample_points(const BoundingBox& bbox);

struct ViolatingPoint {
  SamplePoint point;
  ZoneLevel zone = ZoneLevel::None;
};

struct Verdict {
  std::size_t detection_index = 0;
  std::string class_name;
  HazardClass hazard = HazardClass::Unclassified;
  ZoneLevel raw_zone = ZoneLevel::None;
  Criticality criticality = Criticality::Green;
  std::vector<ViolatingPoint> violating_points;
};

struct ViolationReport {
  std::vector<Verdict> verdicts;
  Criticality max_criticality = Criticality::Green;
  std::array<std::size_t, 4> counts{};

  OrderedJson to_json() const;
};

/// Movable hazards map the zone straight to a criticality; stationary and
/// unclassified ones drop `demotion_levels` levels, never below green.
Criticality criticality_for(HazardClass hazard, ZoneLevel raw_zone, int demotion_levels = 1);

ViolationReport classify(const DetectionSet& detections, const CriticalZoneMap& zmap, const ClassTable& table,
                         int demotion_levels = 1);

}  // namespace railzone
