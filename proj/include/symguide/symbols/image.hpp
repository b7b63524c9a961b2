#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace symguide {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit interleaved RGB raster, row-major, origin top-left.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill = {});

  bool empty() const { return width == 0 || height == 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  Rgb at(int x, int y) const {
    const std::size_t i = offset(x, y);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = offset(x, y);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) * 3;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// Throws ImageFormatError when dims and buffer size disagree.
void check_image(const Image& image);

// PNG is the interchange container; PPM (P6) is accepted for convenience.
// Both are lossless, so decode(encode(img)) == img bit for bit.
std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_image(std::span<const std::uint8_t> bytes);

Image load_image(const std::filesystem::path& path);
// Container chosen from the extension (.png or .ppm).
void save_image(const std::filesystem::path& path, const Image& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace symguide
