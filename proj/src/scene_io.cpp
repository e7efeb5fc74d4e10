#include "railzone/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "railzone/png_io.hpp"

namespace railzone {

using nlohmann::json;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::RailTrack: return "rail_track";
    case Category::RailRaised: return "rail_raised";
    case Category::TramTrack: return "tram_track";
    case Category::OtherKept: return "other_kept";
    case Category::Filtered: return "filtered";
  }
  return "other_kept";
}

std::string_view to_string(HazardClass h) {
  switch (h) {
    case HazardClass::Movable: return "movable";
    case HazardClass::Stationary: return "stationary";
    case HazardClass::Unclassified: return "unclassified";
  }
  return "unclassified";
}

Category category_from_string(std::string_view s) {
  for (auto c : {Category::RailTrack, Category::RailRaised, Category::TramTrack, Category::OtherKept,
                 Category::Filtered})
    if (to_string(c) == s) return c;
  throw Error("unknown class category '" + std::string(s) + "'");
}

ClassTable::ClassTable(std::vector<ClassEntry> entries, std::set<std::string> movable,
                       std::set<std::string> stationary, int void_id)
    : entries_(std::move(entries)),
      movable_(std::move(movable)),
      stationary_(std::move(stationary)),
      void_id_(void_id),
      lookup_(256, -1) {
  if (void_id_ < 0 || void_id_ > 255) throw Error("void id must be in [0, 255]");
  if (std::none_of(entries_.begin(), entries_.end(), [&](const ClassEntry& e) { return e.id == void_id_; }))
    entries_.push_back({void_id_, "void", Category::Filtered});
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::set<std::string> names;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id < 0 || e.id > 255) throw Error("class id " + std::to_string(e.id) + " outside [0, 255]");
    if (lookup_[e.id] >= 0) throw Error("duplicate class id " + std::to_string(e.id));
    if (!names.insert(e.name).second) throw Error("duplicate class name '" + e.name + "'");
    lookup_[e.id] = static_cast<int>(i);
  }
  for (const auto& m : movable_)
    if (stationary_.count(m)) throw Error("class '" + m + "' is both movable and stationary");
}

ClassTable ClassTable::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array())
    throw Error("class table: expected an object with a \"classes\" array");
  std::vector<ClassEntry> entries;
  for (std::size_t i = 0; i < doc["classes"].size(); ++i) {
    const auto& c = doc["classes"][i];
    const std::string where = "class table: classes[" + std::to_string(i) + "]";
    if (!c.is_object() || !c.contains("id") || !c["id"].is_number_integer() || !c.contains("name") ||
        !c["name"].is_string() || !c.contains("category") || !c["category"].is_string())
      throw Error(where + ": expected {\"id\": int, \"name\": str, \"category\": str}");
    try {
      entries.push_back({c["id"].get<int>(), c["name"].get<std::string>(),
                         category_from_string(c["category"].get<std::string>())});
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  auto name_set = [&](const char* key) {
    std::set<std::string> out;
    if (!doc.contains(key)) return out;
    if (!doc[key].is_array()) throw Error(std::string("class table: \"") + key + "\" must be an array");
    for (const auto& v : doc[key]) {
      if (!v.is_string()) throw Error(std::string("class table: \"") + key + "\" entries must be strings");
      out.insert(v.get<std::string>());
    }
    return out;
  };
  int void_id = kDefaultVoidId;
  if (doc.contains("void")) {
    if (!doc["void"].is_number_integer()) throw Error("class table: \"void\" must be an integer");
    void_id = doc["void"].get<int>();
  }
  return ClassTable(std::move(entries), name_set("movable"), name_set("stationary"), void_id);
}

ClassTable ClassTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("unreadable file: " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error("class table " + path.string() + ": " + e.what());
  }
}

const ClassEntry& ClassTable::entry(int id) const {
  if (!contains(id)) throw Error("class id " + std::to_string(id) + " not in class table");
  return entries_[static_cast<std::size_t>(lookup_[id])];
}

const ClassEntry* ClassTable::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

std::string ClassTable::name_of(int id) const {
  return contains(id) ? entry(id).name : std::to_string(id);
}

bool ClassTable::is_track(int id) const {
  if (!contains(id)) return false;
  const auto c = entry(id).category;
  return c == Category::RailTrack || c == Category::TramTrack;
}

bool ClassTable::is_filtered(int id) const {
  return contains(id) && entry(id).category == Category::Filtered;
}

bool ClassTable::has_rail_track() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const ClassEntry& e) { return e.category == Category::RailTrack; });
}

HazardClass ClassTable::hazard_of(std::string_view detection_class) const {
  const std::string key(detection_class);
  if (movable_.count(key)) return HazardClass::Movable;
  if (stationary_.count(key)) return HazardClass::Stationary;
  return HazardClass::Unclassified;
}

MaskLoadResult validate_mask(LabelMask mask, const ClassTable& table) {
  if (mask.width() < 1 || mask.height() < 1) throw Error("zero-area image");
  MaskLoadResult result;
  const auto void_id = static_cast<ClassId>(table.void_id());
  for (auto& v : mask.data()) {
    if (!table.contains(v)) {
      v = void_id;
      ++result.remap_count;
    }
  }
  result.mask = std::move(mask);
  return result;
}

MaskLoadResult load_mask(const std::filesystem::path& path, const ClassTable& table) {
  return validate_mask(read_png_indexed(path), table);
}

void save_mask(const std::filesystem::path& path, const LabelMask& mask) {
  write_file_atomic(path, encode_png_gray(mask));
}

std::vector<Detection> parse_detection_lines(std::istream& in, const ClassTable* table) {
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(where + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw Error(where + ": expected a JSON object");
    if (!obj.contains("class") || !obj["class"].is_string()) throw Error(where + ": missing string \"class\"");
    if (!obj.contains("bbox") || !obj["bbox"].is_array() || obj["bbox"].size() != 4)
      throw Error(where + ": \"bbox\" must be [x, y, w, h]");
    for (const auto& v : obj["bbox"])
      if (!v.is_number()) throw Error(where + ": \"bbox\" entries must be numbers");

    Detection det;
    det.class_name = obj["class"].get<std::string>();
    det.bbox = {obj["bbox"][0].get<double>(), obj["bbox"][1].get<double>(), obj["bbox"][2].get<double>(),
                obj["bbox"][3].get<double>()};
    if (!std::isfinite(det.bbox.x) || !std::isfinite(det.bbox.y) || !std::isfinite(det.bbox.w) ||
        !std::isfinite(det.bbox.h))
      throw Error(where + ": non-finite bbox");
    if (det.bbox.w < 0 || det.bbox.h < 0) throw Error(where + ": negative bbox width or height");
    if (det.bbox.w == 0 || det.bbox.h == 0) throw Error(where + ": zero-size bbox");
    det.score = 1.0;
    if (obj.contains("score")) {
      if (!obj["score"].is_number()) throw Error(where + ": \"score\" must be a number");
      det.score = obj["score"].get<double>();
      if (!(det.score >= 0.0 && det.score <= 1.0)) throw Error(where + ": score outside [0, 1]");
    }
    if (obj.contains("image")) {
      if (obj["image"].is_string())
        det.image_id = obj["image"].get<std::string>();
      else if (obj["image"].is_number_integer())
        det.image_id = std::to_string(obj["image"].get<long long>());
      else
        throw Error(where + ": \"image\" must be a string or integer");
    }
    det.source_line = line_no;
    if (table) det.hazard = table->hazard_of(det.class_name);
    out.push_back(std::move(det));
  }
  return out;
}

std::optional<BoundingBox> clamp_box(const BoundingBox& box, int width, int height) {
  const double max_x = width - 1;
  const double max_y = height - 1;
  if (box.x > max_x || box.y > max_y || box.x + box.w < 0 || box.y + box.h < 0) return std::nullopt;
  const double x0 = std::max(box.x, 0.0);
  const double y0 = std::max(box.y, 0.0);
  const double x1 = std::min(box.x + box.w, max_x);
  const double y1 = std::min(box.y + box.h, max_y);
  return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

DetectionSet load_detections(const std::filesystem::path& path, const ClassTable& table, int image_width,
                             int image_height) {
  if (image_width < 1 || image_height < 1) throw Error("detections: image size must be positive");
  std::ifstream in(path);
  if (!in) throw Error("unreadable file: " + path.string());
  DetectionSet set;
  set.image_width = image_width;
  set.image_height = image_height;
  try {
    set.detections = parse_detection_lines(in, &table);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  for (auto& det : set.detections) {
    const auto clamped = clamp_box(det.bbox, image_width, image_height);
    if (!clamped)
      throw Error(path.string() + ": line " + std::to_string(det.source_line) + ": bbox lies outside the image");
    det.clamped = !(*clamped == det.bbox);
    det.bbox = *clamped;
  }
  return set;
}

void write_detections(std::ostream& out, const std::vector<Detection>& detections) {
  for (const auto& det : detections) {
    json obj = json::object();
    if (!det.image_id.empty()) obj["image"] = det.image_id;
    obj["class"] = det.class_name;
    obj["bbox"] = {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h};
    obj["score"] = det.score;
    out << obj.dump() << '\n';
  }
}

LabelMask filter_classes(const LabelMask& mask, const ClassTable& table) {
  LabelMask out = mask;
  const auto void_id = static_cast<ClassId>(table.void_id());
  for (auto& v : out.data())
    if (table.is_filtered(v)) v = void_id;
  return out;
}

}  // namespace railzone
