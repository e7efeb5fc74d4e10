#include "railzone/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include "railzone/png_io.hpp"

namespace railzone::synth {
namespace {

constexpr double kPi = std::numbers::pi;

double sign(double v) { return v < 0 ? -1.0 : 1.0; }

// JSON field readers that report the full field path on failure.
class Fields {
 public:
  Fields(const nlohmann::json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw Error(path_ + ": expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_[key].is_null(); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw Error(at(key) + ": required number missing");
    }
    if (!obj_[key].is_number()) throw Error(at(key) + ": must be a number");
    const double v = obj_[key].get<double>();
    if (!std::isfinite(v)) throw Error(at(key) + ": must be finite");
    return v;
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw Error(at(key) + ": required integer missing");
    }
    if (!obj_[key].is_number_integer()) throw Error(at(key) + ": must be an integer");
    return obj_[key].get<int>();
  }

  const nlohmann::json& raw(const std::string& key) const { return obj_[key]; }

 private:
  const nlohmann::json& obj_;
  std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(field + ": " + what);
}

}  // namespace

// --- camera -----------------------------------------------------------------

void CameraSpec::validate() const {
  require(focal_px > 0 && std::isfinite(focal_px), "camera.focal_px", "must be > 0");
  require(height_mm > 0 && std::isfinite(height_mm), "camera.height_mm", "must be > 0");
  require(pitch_rad >= 0 && pitch_rad < kPi / 2, "camera.pitch_rad", "must be in [0, pi/2)");
  require(width >= 1, "camera.width", "must be >= 1");
  require(height >= 1, "camera.height", "must be >= 1");
  require(horizon_row() < height, "camera.pitch_rad", "horizon falls below the image");
}

double CameraSpec::horizon_row() const { return cy() - focal_px * std::tan(pitch_rad); }

bool CameraSpec::below_horizon(double v) const {
  const double a = (v - cy()) / focal_px;
  return a * std::cos(pitch_rad) + std::sin(pitch_rad) > 0;
}

double CameraSpec::depth_at_row(double v) const {
  const double a = (v - cy()) / focal_px;
  const double denom = a * std::cos(pitch_rad) + std::sin(pitch_rad);
  if (!(denom > 0)) throw Error("row " + std::to_string(v) + " is at or above the horizon");
  return height_mm / denom;
}

std::optional<GroundPoint> CameraSpec::ground_at(double u, double v) const {
  if (!below_horizon(v)) return std::nullopt;
  const double a = (v - cy()) / focal_px;
  const double b = (u - cx()) / focal_px;
  const double t = depth_at_row(v);
  return GroundPoint{t * b, t * (std::cos(pitch_rad) - a * std::sin(pitch_rad))};
}

std::optional<std::array<double, 2>> CameraSpec::project(const GroundPoint& p) const {
  const double yc = height_mm * std::cos(pitch_rad) - p.z_mm * std::sin(pitch_rad);
  const double zc = height_mm * std::sin(pitch_rad) + p.z_mm * std::cos(pitch_rad);
  if (!(zc > 0)) return std::nullopt;
  return std::array<double, 2>{cx() + focal_px * p.x_mm / zc, cy() + focal_px * yc / zc};
}

// --- track ------------------------------------------------------------------

void TrackSpec::validate() const {
  require(gauge_mm > 0 && std::isfinite(gauge_mm), "track.gauge_mm", "must be > 0");
  require(std::abs(heading_rad) < kPi / 4, "track.heading_deg", "must be within (-45, 45) degrees");
  require(extent_mm > 0 && std::isfinite(extent_mm), "track.extent_mm", "must be > 0");
  if (radius_mm) {
    require(std::abs(*radius_mm) > gauge_mm, "track.radius_mm", "|radius| must exceed the gauge");
    require(extent_mm / std::abs(*radius_mm) + std::abs(heading_rad) < kPi / 2, "track.extent_mm",
            "arc would turn past perpendicular to the view direction");
  }
}

double TrackSpec::signed_offset(const GroundPoint& p) const {
  const double nx = std::cos(heading_rad), nz = -std::sin(heading_rad);
  if (!radius_mm) return (p.x_mm - lateral_offset_mm) * nx + p.z_mm * nz;
  const double r = *radius_mm;
  const double cx = lateral_offset_mm + r * nx, cz = r * nz;
  return sign(r) * (std::abs(r) - std::hypot(p.x_mm - cx, p.z_mm - cz));
}

double TrackSpec::longitudinal(const GroundPoint& p) const {
  const double tx = std::sin(heading_rad), tz = std::cos(heading_rad);
  if (!radius_mm) return (p.x_mm - lateral_offset_mm) * tx + p.z_mm * tz;
  const double r = *radius_mm;
  const double nx = std::cos(heading_rad), nz = -std::sin(heading_rad);
  const double cx = lateral_offset_mm + r * nx, cz = r * nz;
  // Start radius vector is -sign(r) * n; the travel direction turns it with
  // cross(start, direction) = -sign(r).
  const double sx = -sign(r) * nx, sz = -sign(r) * nz;
  const double px = p.x_mm - cx, pz = p.z_mm - cz;
  const double angle = std::atan2(sx * pz - sz * px, sx * px + sz * pz);
  return -sign(r) * angle * std::abs(r);
}

bool TrackSpec::in_extent(const GroundPoint& p) const {
  const double l = longitudinal(p);
  return l >= 0 && l <= extent_mm;
}

std::optional<double> TrackSpec::lateral_at_depth(double z_mm, double s_mm) const {
  const double c = std::cos(heading_rad), s = std::sin(heading_rad);
  if (!radius_mm) return lateral_offset_mm + (s_mm + z_mm * s) / c;
  const double r = *radius_mm;
  const double cx = lateral_offset_mm + r * c, cz = -r * s;
  const double dist = std::abs(r) - sign(r) * s_mm;
  if (!(dist > 0)) return std::nullopt;
  const double dz = z_mm - cz;
  const double under = dist * dist - dz * dz;
  if (under < 0) return std::nullopt;
  return cx - sign(r) * std::sqrt(under);
}

double TrackSpec::edge_distance(const GroundPoint& p) const {
  return std::max(0.0, std::abs(signed_offset(p)) - gauge_mm / 2.0);
}

// --- scene spec -------------------------------------------------------------

void SceneSpec::validate() const {
  camera.validate();
  track.validate();
  try {
    zones.validate();
  } catch (const Error& e) {
    throw Error(std::string("zones_mm: ") + e.what());
  }
  for (const auto& [name, id] : {std::pair{"labels.track", labels.track}, std::pair{"labels.ground", labels.ground},
                                 std::pair{"labels.sky", labels.sky}})
    require(id >= 0 && id <= 255, name, "must be in [0, 255]");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string at = "objects[" + std::to_string(i) + "]";
    require(!objects[i].class_name.empty(), at + ".class", "must be non-empty");
    require(objects[i].width_mm > 0, at + ".width_mm", "must be > 0");
    require(objects[i].depth_mm > 0, at + ".depth_mm", "must be > 0");
    require(objects[i].height_frac >= 0, at + ".height_frac", "must be >= 0");
  }
}

SceneSpec SceneSpec::from_json(const nlohmann::json& doc) {
  SceneSpec spec;
  const Fields root(doc, "");
  if (!root.has("camera")) throw Error("camera: required object missing");
  {
    const Fields f(root.raw("camera"), "camera");
    spec.camera.focal_px = f.number("focal_px");
    spec.camera.height_mm = f.number("height_mm");
    spec.camera.pitch_rad = f.number("pitch_rad");
    spec.camera.width = f.integer("width");
    spec.camera.height = f.integer("height");
  }
  if (root.has("track")) {
    const Fields f(root.raw("track"), "track");
    spec.track.gauge_mm = f.number("gauge_mm", kStandardGaugeMm);
    spec.track.lateral_offset_mm = f.number("lateral_offset_mm", 0.0);
    spec.track.heading_rad = f.number("heading_deg", 0.0) * kPi / 180.0;
    if (f.has("radius_mm")) spec.track.radius_mm = f.number("radius_mm");
    spec.track.extent_mm = f.number("extent_mm", 100000.0);
  }
  if (root.has("zones_mm")) {
    const auto& z = root.raw("zones_mm");
    require(z.is_array() && z.size() == 3, "zones_mm", "must be an array of three distances");
    for (std::size_t i = 0; i < 3; ++i) {
      require(z[i].is_number(), "zones_mm[" + std::to_string(i) + "]", "must be a number");
      spec.zones.distances_mm[i] = z[i].get<double>();
    }
  }
  if (root.has("include_track_in_red")) {
    require(root.raw("include_track_in_red").is_boolean(), "include_track_in_red", "must be a boolean");
    spec.zones.include_track_in_red = root.raw("include_track_in_red").get<bool>();
  }
  if (root.has("labels")) {
    const Fields f(root.raw("labels"), "labels");
    spec.labels.track = f.integer("track", spec.labels.track);
    spec.labels.ground = f.integer("ground", spec.labels.ground);
    spec.labels.sky = f.integer("sky", spec.labels.sky);
  }
  if (root.has("objects")) {
    const auto& arr = root.raw("objects");
    require(arr.is_array(), "objects", "must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "objects[" + std::to_string(i) + "]";
      const Fields f(arr[i], at);
      GroundObject obj;
      require(f.has("class") && f.raw("class").is_string(), at + ".class", "required string missing");
      obj.class_name = f.raw("class").get<std::string>();
      obj.x_mm = f.number("x_mm");
      obj.z_mm = f.number("z_mm");
      obj.width_mm = f.number("width_mm", obj.width_mm);
      obj.depth_mm = f.number("depth_mm", obj.depth_mm);
      obj.height_frac = f.number("height_frac", obj.height_frac);
      spec.objects.push_back(obj);
    }
  }
  spec.validate();
  return spec;
}

OrderedJson SceneSpec::to_json() const {
  OrderedJson track_json = {{"gauge_mm", track.gauge_mm},
                            {"lateral_offset_mm", track.lateral_offset_mm},
                            {"heading_deg", track.heading_rad * 180.0 / kPi},
                            {"radius_mm", nullptr},
                            {"extent_mm", track.extent_mm}};
  if (track.radius_mm) track_json["radius_mm"] = *track.radius_mm;
  auto objs = OrderedJson::array();
  for (const auto& o : objects)
    objs.push_back({{"class", o.class_name},
                    {"x_mm", o.x_mm},
                    {"z_mm", o.z_mm},
                    {"width_mm", o.width_mm},
                    {"depth_mm", o.depth_mm},
                    {"height_frac", o.height_frac}});
  return {{"camera",
           {{"focal_px", camera.focal_px},
            {"height_mm", camera.height_mm},
            {"pitch_rad", camera.pitch_rad},
            {"width", camera.width},
            {"height", camera.height}}},
          {"track", track_json},
          {"zones_mm", {zones.distances_mm[0], zones.distances_mm[1], zones.distances_mm[2]}},
          {"include_track_in_red", zones.include_track_in_red},
          {"labels", {{"track", labels.track}, {"ground", labels.ground}, {"sky", labels.sky}}},
          {"objects", objs}};
}

// --- rendering --------------------------------------------------------------

double projected_gauge_width(const CameraSpec& cam, const TrackSpec& track, int row) {
  if (!cam.below_horizon(row)) throw Error("row " + std::to_string(row) + " is at or above the horizon");
  const double depth = cam.depth_at_row(row);
  const double z = cam.ground_at(cam.cx(), row)->z_mm;
  const auto left = track.lateral_at_depth(z, -track.gauge_mm / 2.0);
  const auto right = track.lateral_at_depth(z, track.gauge_mm / 2.0);
  if (!left || !right) throw Error("track does not cross row " + std::to_string(row));
  return cam.focal_px * (*right - *left) / depth;
}

ZoneLevel zone_for_distance(const ZoneSpec& zones, double edge_distance_mm) {
  if (edge_distance_mm <= zones.distances_mm[0]) return ZoneLevel::Red;
  if (edge_distance_mm <= zones.distances_mm[1]) return ZoneLevel::Orange;
  if (edge_distance_mm <= zones.distances_mm[2]) return ZoneLevel::Yellow;
  return ZoneLevel::None;
}

SceneTruth render_scene(const SceneSpec& spec) {
  spec.validate();
  const auto& cam = spec.camera;
  const auto& track = spec.track;
  const double half_gauge = track.gauge_mm / 2.0;

  SceneTruth truth;
  truth.mask = LabelMask(cam.width, cam.height, static_cast<ClassId>(spec.labels.sky));
  truth.zone_truth = Grid<ZoneLevel>(cam.width, cam.height, ZoneLevel::None);
  bool any_track = false;

  for (int v = 0; v < cam.height; ++v) {
    RowTruth row_truth;
    row_truth.row = v;
    if (!cam.below_horizon(v)) {
      truth.rows.push_back(row_truth);
      continue;
    }
    const double depth = cam.depth_at_row(v);
    const double z = cam.ground_at(cam.cx(), v)->z_mm;
    auto to_column = [&](double x_mm) { return cam.cx() + cam.focal_px * x_mm / depth; };

    for (int u = 0; u < cam.width; ++u) {
      const GroundPoint p{depth * (u - cam.cx()) / cam.focal_px, z};
      auto& label = truth.mask(u, v);
      label = static_cast<ClassId>(spec.labels.ground);
      if (!track.in_extent(p)) continue;
      const double dist = std::abs(track.signed_offset(p)) - half_gauge;
      if (dist <= 0) {
        label = static_cast<ClassId>(spec.labels.track);
        any_track = true;
        truth.zone_truth(u, v) = spec.zones.include_track_in_red ? ZoneLevel::Red : ZoneLevel::None;
      } else {
        truth.zone_truth(u, v) = zone_for_distance(spec.zones, dist);
      }
    }

    const auto left = track.lateral_at_depth(z, -half_gauge);
    const auto right = track.lateral_at_depth(z, half_gauge);
    if (left && right && track.in_extent({*left, z}) && track.in_extent({*right, z})) {
      row_truth.valid = true;
      row_truth.left_edge = to_column(*left);
      row_truth.right_edge = to_column(*right);
      row_truth.gauge_px = row_truth.right_edge - row_truth.left_edge;
      for (std::size_t k = 0; k < 3; ++k) {
        const double reach = half_gauge + spec.zones.distances_mm[k];
        if (const auto x = track.lateral_at_depth(z, -reach)) row_truth.left_boundary[k] = to_column(*x);
        if (const auto x = track.lateral_at_depth(z, reach)) row_truth.right_boundary[k] = to_column(*x);
      }
    }
    truth.rows.push_back(row_truth);
  }
  if (!any_track) throw Error("degenerate camera: no track point is visible below the horizon");

  for (const auto& obj : spec.objects) {
    ObjectTruth ot;
    ot.object = obj;
    const GroundPoint centre{obj.x_mm, obj.z_mm};
    ot.center_distance_mm = track.edge_distance(centre);

    // Footprint distance: minimum of the edge distance over the rectangle,
    // sampled densely (exact for straight tracks at the corners, near-exact on arcs).
    double best = std::numeric_limits<double>::infinity();
    constexpr int kSteps = 64;
    for (int i = 0; i <= kSteps; ++i)
      for (int j = 0; j <= kSteps; ++j) {
        const GroundPoint q{obj.x_mm + obj.width_mm * (i / double(kSteps) - 0.5),
                            obj.z_mm + obj.depth_mm * (j / double(kSteps) - 0.5)};
        best = std::min(best, track.edge_distance(q));
      }
    ot.footprint_distance_mm = best;
    ot.footprint_zone = zone_for_distance(spec.zones, best);

    double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
    double v_min = u_min, v_max = -u_min;
    bool projectable = true;
    for (double sx : {-0.5, 0.5})
      for (double sz : {-0.5, 0.5}) {
        const GroundPoint corner{obj.x_mm + sx * obj.width_mm, obj.z_mm + sz * obj.depth_mm};
        const auto px = cam.project(corner);
        if (!px || !cam.below_horizon((*px)[1])) {
          projectable = false;
          continue;
        }
        u_min = std::min(u_min, (*px)[0]);
        u_max = std::max(u_max, (*px)[0]);
        v_min = std::min(v_min, (*px)[1]);
        v_max = std::max(v_max, (*px)[1]);
      }
    if (projectable) {
      const double rise = obj.height_frac * (u_max - u_min);
      const BoundingBox box{u_min, v_min - rise, u_max - u_min, v_max - (v_min - rise)};
      if (const auto clamped = clamp_box(box, cam.width, cam.height)) {
        ot.visible = true;
        ot.detection.class_name = obj.class_name;
        ot.detection.bbox = *clamped;
        ot.detection.clamped = !(*clamped == box);
        ot.detection.score = 1.0;
      }
    }
    truth.objects.push_back(std::move(ot));
  }
  return truth;
}

DetectionSet SceneTruth::detections() const {
  DetectionSet set;
  set.image_width = mask.width();
  set.image_height = mask.height();
  for (const auto& o : objects)
    if (o.visible) set.detections.push_back(o.detection);
  return set;
}

OrderedJson SceneTruth::manifest(const SceneSpec& spec) const {
  auto objs = OrderedJson::array();
  for (const auto& o : objects) {
    OrderedJson entry = {{"class", o.object.class_name},
                         {"visible", o.visible},
                         {"center_distance_mm", o.center_distance_mm},
                         {"footprint_distance_mm", o.footprint_distance_mm},
                         {"footprint_zone", std::string(to_string(o.footprint_zone))}};
    if (o.visible)
      entry["bbox"] = {o.detection.bbox.x, o.detection.bbox.y, o.detection.bbox.w, o.detection.bbox.h};
    objs.push_back(entry);
  }
  auto rows_json = OrderedJson::array();
  for (const auto& r : rows)
    if (r.valid) rows_json.push_back({{"row", r.row}, {"gauge_px", r.gauge_px}, {"p_d", r.gauge_px / spec.track.gauge_mm}});
  return {{"scene", spec.to_json()},
          {"files",
           {{"mask", "mask.png"}, {"detections", "detections.jsonl"}, {"zone_truth", "zones_truth.png"}}},
          {"horizon_row", spec.camera.horizon_row()},
          {"objects", objs},
          {"rows", rows_json}};
}

void write_scene(const SceneSpec& spec, const SceneTruth& truth, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "mask.png", encode_png_gray(truth.mask));
  Grid<std::uint8_t> zones(truth.zone_truth.width(), truth.zone_truth.height());
  for (std::size_t i = 0; i < zones.size(); ++i) zones.data()[i] = static_cast<std::uint8_t>(truth.zone_truth.data()[i]);
  write_file_atomic(out_dir / "zones_truth.png", encode_png_gray(zones));
  std::ostringstream det;
  write_detections(det, truth.detections().detections);
  write_file_atomic(out_dir / "detections.jsonl", det.str());
  write_file_atomic(out_dir / "manifest.json", dump_fixed(truth.manifest(spec)));
}

}  // namespace railzone::synth
