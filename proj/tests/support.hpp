#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "railzone/scene_io.hpp"

namespace railzone::testing {

// Small table used across unit tests:
//   1 rail (rail_track), 2 tram (tram_track), 3 pole, 4 veg (filtered),
//   5 raised (rail_raised), 6 sky, 255 void.
inline ClassTable small_table() {
  return ClassTable({{1, "rail", Category::RailTrack},
                     {2, "tram", Category::TramTrack},
                     {3, "pole", Category::OtherKept},
                     {4, "veg", Category::Filtered},
                     {5, "raised", Category::RailRaised},
                     {6, "sky", Category::OtherKept}},
                    {"person", "car", "bicycle"}, {"backpack", "suitcase"});
}

inline ClassTable shipped_table() { return ClassTable::load(std::filesystem::path(RAILZONE_DATA_DIR) / "classes_default.json"); }

// Rows of characters; '.' is void (255), digits are class ids, letters map via `legend`.
inline LabelMask mask_from(const std::vector<std::string>& rows, const std::map<char, int>& legend = {}) {
  LabelMask m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), 255);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const char c = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      if (c == '.') continue;
      if (auto it = legend.find(c); it != legend.end())
        m(x, y) = static_cast<ClassId>(it->second);
      else
        m(x, y) = static_cast<ClassId>(c - '0');
    }
  return m;
}

inline LabelMask random_mask(std::mt19937& rng, int w, int h, const std::vector<int>& classes) {
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
  LabelMask m(w, h);
  for (auto& v : m.data()) v = static_cast<ClassId>(classes[pick(rng)]);
  return m;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("railzone_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace railzone::testing
