#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "railzone/grid.hpp"
#include "railzone/json_format.hpp"
#include "railzone/rail_gauge.hpp"
#include "railzone/scene_io.hpp"
#include "railzone/zone_assessor.hpp"

namespace railzone::synth {

/// Point on the flat ground plane: X lateral (right positive), Z forward, mm.
struct GroundPoint {
  double x_mm = 0;
  double z_mm = 0;
};

/// Pinhole camera above flat ground with zero roll. Pixel centres sit at
/// integer coordinates; the principal point is the image centre.
struct CameraSpec {
  double focal_px = 1000;
  double height_mm = 3000;
  /// Downward tilt of the optical axis.
  double pitch_rad = 0.3;
  int width = 1280;
  int height = 720;

  void validate() const;
  double cx() const { return (width - 1) / 2.0; }
  double cy() const { return (height - 1) / 2.0; }
  double horizon_row() const;
  bool below_horizon(double v) const;
  /// Ground point seen through image point (u, v); nullopt at or above the horizon.
  std::optional<GroundPoint> ground_at(double u, double v) const;
  /// Distance along the optical axis to the ground seen at row v (the ray
  /// parameter scaling lateral millimetres into pixels: u = cx + f X / depth).
  double depth_at_row(double v) const;
  /// Image position of a ground point; nullopt behind the camera.
  std::optional<std::array<double, 2>> project(const GroundPoint& p) const;
};

/// Track centreline starting at (lateral_offset, 0) with the given heading,
/// straight or a circular arc of signed radius (positive curves right).
struct TrackSpec {
  double gauge_mm = kStandardGaugeMm;
  double lateral_offset_mm = 0;
  double heading_rad = 0;
  std::optional<double> radius_mm;
  double extent_mm = 100000;

  void validate() const;
  /// Signed perpendicular offset from the centreline (right positive).
  double signed_offset(const GroundPoint& p) const;
  /// Distance travelled along the centreline to the foot of p.
  double longitudinal(const GroundPoint& p) const;
  bool in_extent(const GroundPoint& p) const;
  /// Lateral position at depth z where the signed offset equals s, on the
  /// branch of the centreline that starts near the camera.
  std::optional<double> lateral_at_depth(double z_mm, double s_mm) const;
  /// Distance from p to the nearest rail edge, 0 on the track.
  double edge_distance(const GroundPoint& p) const;
};

struct GroundObject {
  std::string class_name;
  double x_mm = 0;
  double z_mm = 0;
  double width_mm = 500;
  double depth_mm = 500;
  /// Bounding box rises above the footprint by this fraction of its pixel width.
  double height_frac = 1.0;
};

struct SceneLabels {
  int track = 12;
  int ground = 255;
  int sky = 10;
};

struct SceneSpec {
  CameraSpec camera;
  TrackSpec track;
  ZoneSpec zones;
  SceneLabels labels;
  std::vector<GroundObject> objects;

  void validate() const;
  /// Parses and validates; errors name the offending field path.
  static SceneSpec from_json(const nlohmann::json& doc);
  OrderedJson to_json() const;
};

/// Exact cross-section of the track and zone edges at one image row, in
/// pixel-centre column coordinates (not clamped to the image).
struct RowTruth {
  int row = 0;
  bool valid = false;
  double gauge_px = 0;
  double left_edge = 0;
  double right_edge = 0;
  /// Indexed red, orange, yellow; empty where the band leaves the ground model.
  std::array<std::optional<double>, 3> left_boundary{};
  std::array<std::optional<double>, 3> right_boundary{};
};

struct ObjectTruth {
  GroundObject object;
  bool visible = false;
  Detection detection;
  double center_distance_mm = 0;
  double footprint_distance_mm = 0;
  ZoneLevel footprint_zone = ZoneLevel::None;
};

struct SceneTruth {
  LabelMask mask;
  Grid<ZoneLevel> zone_truth;
  std::vector<ObjectTruth> objects;
  std::vector<RowTruth> rows;

  DetectionSet detections() const;
  OrderedJson manifest(const SceneSpec& spec) const;
};

/// Exact projected horizontal width of the track region at an image row.
double projected_gauge_width(const CameraSpec& cam, const TrackSpec& track, int row);

ZoneLevel zone_for_distance(const ZoneSpec& zones, double edge_distance_mm);

SceneTruth render_scene(const SceneSpec& spec);

/// Writes mask.png, detections.jsonl, zones_truth.png and manifest.json.
void write_scene(const SceneSpec& spec, const SceneTruth& truth, const std::filesystem::path& out_dir);

}  // namespace railzone::synth
