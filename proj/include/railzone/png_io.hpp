#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "railzone/grid.hpp"

namespace railzone {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Grid<Rgb>;

/// Decodes an 8-bit single-channel PNG. Palette images yield their raw
/// indices, grayscale images their gray values. Anything else throws.
Grid<std::uint8_t> read_png_indexed(const std::filesystem::path& path);

/// Decodes any 8-bit PNG to RGB (alpha dropped, gray replicated).
RgbImage read_png_rgb(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png_gray(const Grid<std::uint8_t>& image);
std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace railzone
