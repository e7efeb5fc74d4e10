#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "railzone/grid.hpp"
#include "railzone/json_format.hpp"
#include "railzone/rail_gauge.hpp"
#include "railzone/scene_io.hpp"

namespace railzone {

/// Raster values double as the zone image encoding.
enum class ZoneLevel : std::uint8_t { None = 0, Yellow = 1, Orange = 2, Red = 3 };

std::string_view to_string(ZoneLevel z);

/// Lateral distances from the track edge, innermost (red) first.
struct ZoneSpec {
  std::array<double, 3> distances_mm{600.0, 1000.0, 2000.0};
  bool include_track_in_red = true;

  void validate() const;
  double distance(ZoneLevel level) const;
};

struct BoundaryPoint {
  int row = 0;
  /// Continuous column in pixel-centre coordinates, clamped to [0, width-1].
  double column = 0;
};

struct ZoneBoundary {
  int track_id = 0;
  ZoneLevel level = ZoneLevel::Red;
  std::vector<BoundaryPoint> left;
  std::vector<BoundaryPoint> right;
};

struct CriticalZoneMap {
  std::vector<ZoneBoundary> boundaries;
  Grid<ZoneLevel> raster;
  /// Track components without any usable gauge sample; painted but not zoned.
  std::vector<int> uncalibrated_tracks;

  OrderedJson boundaries_json() const;
  Grid<std::uint8_t> raster_image() const;
};

/// Places zone edges at the metric distances from each track run, measured
/// horizontally from the outer pixel edge of the run. A pixel belongs to a
/// level when its centre lies within that distance (inclusive).
CriticalZoneMap estimate_zones(const LabelMask& mask, const ClassTable& table, const TrackRuns& runs,
                               const GaugeProfile& profile, const ZoneSpec& spec);

CriticalZoneMap estimate_zones(const LabelMask& mask, const ClassTable& table, const GaugeProfile& profile,
                               const ZoneSpec& spec);

ZoneLevel zone_at(const CriticalZoneMap& zmap, int x, int y);

}  // namespace railzone
