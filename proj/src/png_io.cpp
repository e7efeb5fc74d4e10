#include "railzone/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

namespace railzone {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("unreadable file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void read_from_cursor(png_structp png, png_bytep out, png_size_t count) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + count > cur->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, cur->bytes->data() + cur->offset, count);
  cur->offset += count;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + count);
}

void flush_noop(png_structp) {}

struct ErrorSink {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}
void on_png_warning(png_structp, png_const_charp) {}

std::vector<std::uint8_t> checked_png_bytes(const std::filesystem::path& path) {
  static constexpr std::array<std::uint8_t, 8> kSignature{137, 80, 78, 71, 13, 10, 26, 10};
  auto bytes = read_bytes(path);
  if (bytes.size() < 8 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin()))
    throw Error("unreadable file: not a PNG: " + path.string());
  // libpng rejects zero dimensions with a generic message; report them as such first.
  if (bytes.size() >= 24 && std::memcmp(bytes.data() + 12, "IHDR", 4) == 0 &&
      (be32(bytes.data() + 16) == 0 || be32(bytes.data() + 20) == 0))
    throw Error("zero-area image: " + path.string());
  return bytes;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> pixels;
};

enum class DecodeMode { Indexed, Rgb };

/// All C++ objects touched by libpng are created before setjmp so that a
/// longjmp out of libpng never skips a destructor.
Decoded decode(const std::filesystem::path& path, DecodeMode mode) {
  const auto bytes = checked_png_bytes(path);
  ReadCursor cursor{&bytes, 0};
  ErrorSink sink;
  Decoded out;
  std::vector<png_bytep> rows;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  if (!png) throw Error("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialisation failed");
  }
  volatile bool bad_layout = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(std::string("PNG decode error in ") + path.string() + ": " + sink.message);
  }
  png_set_read_fn(png, &cursor, read_from_cursor);
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.color_type = png_get_color_type(png, info);
  out.bit_depth = png_get_bit_depth(png, info);

  std::size_t channels = 1;
  if (mode == DecodeMode::Indexed) {
    if (out.color_type != PNG_COLOR_TYPE_GRAY && out.color_type != PNG_COLOR_TYPE_PALETTE) bad_layout = true;
    if (out.bit_depth != 8) bad_layout = true;
  } else {
    channels = 3;
    if (out.bit_depth == 16) png_set_strip_16(png);
    if (out.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (out.color_type == PNG_COLOR_TYPE_GRAY || out.color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    if (out.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  }
  if (!bad_layout) {
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    if (png_get_channels(png, info) != channels) bad_layout = true;
  }
  if (!bad_layout) {
    const std::size_t stride = static_cast<std::size_t>(out.width) * channels;
    out.pixels.resize(stride * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = out.pixels.data() + y * stride;
    png_read_image(png, rows.data());
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (bad_layout) {
    if (mode == DecodeMode::Indexed && out.color_type != PNG_COLOR_TYPE_GRAY &&
        out.color_type != PNG_COLOR_TYPE_PALETTE)
      throw Error("multi-channel image not supported for masks: " + path.string());
    if (mode == DecodeMode::Indexed) throw Error("non-8-bit image not supported for masks: " + path.string());
    throw Error("unexpected PNG channel layout: " + path.string());
  }
  return out;
}

std::vector<std::uint8_t> encode(int width, int height, int color_type, const std::uint8_t* pixels,
                                 std::size_t channels) {
  if (width <= 0 || height <= 0) throw Error("cannot encode a zero-area image");
  ErrorSink sink;
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  if (!png) throw Error("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(std::string("PNG encode error: ") + sink.message);
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * stride));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

Grid<std::uint8_t> read_png_indexed(const std::filesystem::path& path) {
  auto decoded = decode(path, DecodeMode::Indexed);
  Grid<std::uint8_t> out(decoded.width, decoded.height);
  out.data() = std::move(decoded.pixels);
  return out;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  const auto decoded = decode(path, DecodeMode::Rgb);
  RgbImage out(decoded.width, decoded.height);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = Rgb{decoded.pixels[3 * i], decoded.pixels[3 * i + 1], decoded.pixels[3 * i + 2]};
  return out;
}

std::vector<std::uint8_t> encode_png_gray(const Grid<std::uint8_t>& image) {
  return encode(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, image.data().data(), 1);
}

std::vector<std::uint8_t> encode_png_rgb(const RgbImage& image) {
  static_assert(sizeof(Rgb) == 3);
  return encode(image.width(), image.height(), PNG_COLOR_TYPE_RGB,
                reinterpret_cast<const std::uint8_t*>(image.data().data()), 3);
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace railzone
