#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "railzone/grid.hpp"

namespace railzone {

enum class Category { RailTrack, RailRaised, TramTrack, OtherKept, Filtered };

enum class HazardClass { Movable, Stationary, Unclassified };

std::string_view to_string(Category c);
std::string_view to_string(HazardClass h);
Category category_from_string(std::string_view s);

struct ClassEntry {
  int id = 0;
  std::string name;
  Category category = Category::OtherKept;
};

/// Segmentation classes plus the hazard tiers used for detection classes.
///
/// The void class is always present: if the document does not list an entry
/// with the void id, one named "void" with category `filtered` is added.
class ClassTable {
 public:
  static constexpr int kDefaultVoidId = 255;

  ClassTable(std::vector<ClassEntry> entries, std::set<std::string> movable,
             std::set<std::string> stationary, int void_id = kDefaultVoidId);

  static ClassTable from_json(const nlohmann::json& doc);
  static ClassTable load(const std::filesystem::path& path);

  const std::vector<ClassEntry>& entries() const { return entries_; }
  const std::set<std::string>& movable() const { return movable_; }
  const std::set<std::string>& stationary() const { return stationary_; }
  int void_id() const { return void_id_; }

  bool contains(int id) const { return id >= 0 && id < 256 && lookup_[id] >= 0; }
  const ClassEntry& entry(int id) const;
  const ClassEntry* find(std::string_view name) const;
  std::string name_of(int id) const;

  /// True for rail_track and tram_track categories (the between-rails surface).
  bool is_track(int id) const;
  bool is_filtered(int id) const;
  bool has_rail_track() const;

  HazardClass hazard_of(std::string_view detection_class) const;

 private:
  std::vector<ClassEntry> entries_;
  std::set<std::string> movable_;
  std::set<std::string> stationary_;
  int void_id_;
  std::vector<int> lookup_;  // class id -> index in entries_, -1 if absent
};

struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::string class_name;
  BoundingBox bbox;
  double score = 0;
  std::string image_id;
  int source_line = 0;
  bool clamped = false;
  HazardClass hazard = HazardClass::Unclassified;
};

struct DetectionSet {
  std::vector<Detection> detections;
  int image_width = 0;
  int image_height = 0;
};

struct MaskLoadResult {
  LabelMask mask;
  std::size_t remap_count = 0;
};

/// Reads an 8-bit single-channel grayscale or palette PNG; pixel values are
/// class ids. Values absent from the table become the void id.
MaskLoadResult load_mask(const std::filesystem::path& path, const ClassTable& table);

/// Validates an in-memory grid against the table (same remap rule as load_mask).
MaskLoadResult validate_mask(LabelMask mask, const ClassTable& table);

void save_mask(const std::filesystem::path& path, const LabelMask& mask);

/// One JSON object per line: {"class": str, "bbox": [x,y,w,h], "score": real}
/// with optional "image" key; "score" defaults to 1 when absent (ground-truth
/// files). Blank lines are skipped. No clamping.
std::vector<Detection> parse_detection_lines(std::istream& in, const ClassTable* table);

/// Loads detections for one image of the given size and clamps every box to
/// the pixel range [0, width-1] x [0, height-1].
DetectionSet load_detections(const std::filesystem::path& path, const ClassTable& table,
                             int image_width, int image_height);

/// Clamps a box to pixel centers of a width x height image. Returns nullopt
/// when the box lies entirely outside.
std::optional<BoundingBox> clamp_box(const BoundingBox& box, int width, int height);

void write_detections(std::ostream& out, const std::vector<Detection>& detections);

/// Remaps pixels of filtered classes to void.
LabelMask filter_classes(const LabelMask& mask, const ClassTable& table);

}  // namespace railzone
