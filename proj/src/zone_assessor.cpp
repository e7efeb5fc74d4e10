#include "railzone/zone_assessor.hpp"

#include <algorithm>
#include <cmath>

namespace railzone {

std::string_view to_string(ZoneLevel z) {
  switch (z) {
    case ZoneLevel::None: return "none";
    case ZoneLevel::Yellow: return "yellow";
    case ZoneLevel::Orange: return "orange";
    case ZoneLevel::Red: return "red";
  }
  return "none";
}

void ZoneSpec::validate() const {
  for (std::size_t i = 0; i < distances_mm.size(); ++i) {
    if (!(distances_mm[i] > 0) || !std::isfinite(distances_mm[i]))
      throw Error("zone distances must be positive");
    if (i > 0 && !(distances_mm[i] > distances_mm[i - 1]))
      throw Error("zone distances must be strictly increasing (red < orange < yellow)");
  }
}

double ZoneSpec::distance(ZoneLevel level) const {
  switch (level) {
    case ZoneLevel::Red: return distances_mm[0];
    case ZoneLevel::Orange: return distances_mm[1];
    case ZoneLevel::Yellow: return distances_mm[2];
    case ZoneLevel::None: break;
  }
  throw Error("zone level none has no distance");
}

OrderedJson CriticalZoneMap::boundaries_json() const {
  auto out = OrderedJson::array();
  for (const auto& b : boundaries) {
    auto side = [](const std::vector<BoundaryPoint>& pts) {
      auto arr = OrderedJson::array();
      for (const auto& p : pts) arr.push_back({p.column, p.row});
      return arr;
    };
    out.push_back({{"track", b.track_id},
                   {"level", std::string(to_string(b.level))},
                   {"left", side(b.left)},
                   {"right", side(b.right)}});
  }
  return out;
}

Grid<std::uint8_t> CriticalZoneMap::raster_image() const {
  Grid<std::uint8_t> out(raster.width(), raster.height());
  for (std::size_t i = 0; i < raster.size(); ++i) out.data()[i] = static_cast<std::uint8_t>(raster.data()[i]);
  return out;
}

CriticalZoneMap estimate_zones(const LabelMask& mask, const ClassTable& table, const TrackRuns& runs,
                               const GaugeProfile& profile, const ZoneSpec& spec) {
  spec.validate();
  if (profile.empty()) throw Error("no gauge reference found");

  const int width = mask.width();
  const double max_col = width - 1;
  CriticalZoneMap zmap;
  zmap.raster = Grid<ZoneLevel>(width, mask.height(), ZoneLevel::None);

  constexpr std::array<ZoneLevel, 3> kLevels{ZoneLevel::Yellow, ZoneLevel::Orange, ZoneLevel::Red};

  // Runs arrive grouped by track id and ordered by row. A 4-connected
  // component covers every row between its first and last, so the boundary
  // needs no row interpolation; rows without a gauge sample get an
  // interpolated p_d from the profile instead.
  auto first = runs.runs.begin();
  while (first != runs.runs.end()) {
    const int track = first->track_id;
    auto last = std::find_if(first, runs.runs.end(), [&](const TrackRun& r) { return r.track_id != track; });
    if (!profile.has_track(track)) {
      zmap.uncalibrated_tracks.push_back(track);
      first = last;
      continue;
    }
    for (ZoneLevel level : kLevels) {
      const double distance = spec.distance(level);
      ZoneBoundary boundary{track, level, {}, {}};
      for (auto it = first; it != last; ++it) {
        const double offset = metric_to_pixels(profile, it->row, track, distance);
        boundary.left.push_back({it->row, std::clamp(it->x_left - 0.5 - offset, 0.0, max_col)});
        boundary.right.push_back({it->row, std::clamp(it->x_right + 0.5 + offset, 0.0, max_col)});

        // Integer form of the inclusive centre test, exact under mirroring.
        const long reach = static_cast<long>(std::floor(offset + 0.5));
        const long lo = std::max(0L, static_cast<long>(it->x_left) - reach);
        const long hi = std::min(static_cast<long>(width) - 1, static_cast<long>(it->x_right) + reach);
        auto row = zmap.raster.row(it->row);
        for (long x = lo; x <= hi; ++x)
          if (row[static_cast<std::size_t>(x)] < level) row[static_cast<std::size_t>(x)] = level;
      }
      zmap.boundaries.push_back(std::move(boundary));
    }
    first = last;
  }

  if (spec.include_track_in_red) {
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (table.is_track(mask.data()[i])) zmap.raster.data()[i] = ZoneLevel::Red;
  }
  return zmap;
}

CriticalZoneMap estimate_zones(const LabelMask& mask, const ClassTable& table, const GaugeProfile& profile,
                               const ZoneSpec& spec) {
  return estimate_zones(mask, table, extract_track_runs(mask, table), profile, spec);
}

ZoneLevel zone_at(const CriticalZoneMap& zmap, int x, int y) {
  if (!zmap.raster.contains(x, y))
    throw Error("point (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the zone raster");
  return zmap.raster(x, y);
}

}  // namespace railzone
