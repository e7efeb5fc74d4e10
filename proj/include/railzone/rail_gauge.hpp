#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "railzone/grid.hpp"
#include "railzone/json_format.hpp"
#include "railzone/scene_io.hpp"

namespace railzone {

/// Standard gauge between the inner rail faces, millimetres.
inline constexpr double kStandardGaugeMm = 1435.0;

/// Widest horizontal span of one track component in one image row.
struct TrackRun {
  int row = 0;
  int x_left = 0;
  int x_right = 0;
  int track_id = 0;

  int width() const { return x_right - x_left + 1; }
  friend bool operator==(const TrackRun&, const TrackRun&) = default;
};

struct TrackRuns {
  /// Ordered by track id, then row.
  std::vector<TrackRun> runs;
  int track_components = 0;
  /// Rows in which a component had several disjoint spans (only the widest is kept).
  std::size_t split_count = 0;
};

/// Labels 4-connected components of the rail_track/tram_track pixels and
/// emits one run per (component, row). Component ids start at 1 and follow
/// raster order of each component's first pixel.
TrackRuns extract_track_runs(const LabelMask& mask, const ClassTable& table);

struct GaugeSample {
  int row = 0;
  int d_px_in = 0;
  /// Pixels per millimetre at this row.
  double p_d = 0;
  int track_id = 0;
};

/// Per-row pixel/millimetre conversion for each track component.
class GaugeProfile {
 public:
  GaugeProfile() = default;
  GaugeProfile(std::vector<GaugeSample> samples, int track_components, double d_real_in_mm);

  const std::vector<GaugeSample>& samples() const { return samples_; }
  int track_components() const { return track_components_; }
  double d_real_in_mm() const { return d_real_in_mm_; }
  bool empty() const { return samples_.empty(); }
  bool has_track(int track_id) const { return by_track_.count(track_id) != 0; }

  /// p_d at `row`: the sample itself, else linear interpolation between the
  /// nearest sampled rows of the same track, else the nearest end sample.
  double pixels_per_mm(int row, int track_id) const;

  OrderedJson to_json() const;

 private:
  std::vector<GaugeSample> samples_;
  int track_components_ = 0;
  double d_real_in_mm_ = kStandardGaugeMm;
  std::map<int, std::vector<std::pair<int, double>>> by_track_;  // (row, p_d) ascending
};

GaugeProfile build_gauge_profile(std::span<const TrackRun> runs, double d_real_in_mm = kStandardGaugeMm,
                                 int min_width = 8);

/// D = p_d(row) * d_real_out, the pixel length of a metric distance at `row`.
double metric_to_pixels(const GaugeProfile& profile, int row, int track_id, double d_real_out_mm);

}  // namespace railzone
