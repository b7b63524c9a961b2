#include "symguide/symbols/image.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

#include "symguide/common/errors.hpp"

namespace symguide {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw ImageFormatError("negative image dimensions");
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

void check_image(const Image& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw ImageFormatError("image has non-positive dimensions");
  }
  const std::size_t expected =
      static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3;
  if (image.pixels.size() != expected) {
    throw ImageFormatError("pixel buffer holds " + std::to_string(image.pixels.size()) +
                           " bytes, expected " + std::to_string(expected));
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  check_image(image);
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw ImageFormatError(std::string("png sizing failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0,
                                 nullptr)) {
    throw ImageFormatError(std::string("png encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
  check_image(image);
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

namespace {

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw ImageFormatError(std::string("png decode failed: ") + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image image(static_cast<int>(png.width), static_cast<int>(png.height));
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw ImageFormatError(std::string("png decode failed: ") + png.message);
  }
  return image;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos]) != 0) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    long value = 0;
    const std::size_t begin = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) throw ImageFormatError("ppm header value too large");
      ++pos;
    }
    if (begin == pos) throw ImageFormatError("malformed ppm header");
    return static_cast<int>(value);
  };
  const int w = number();
  const int h = number();
  const int maxval = number();
  if (maxval != 255) throw ImageFormatError("only 8-bit ppm supported");
  if (pos >= bytes.size() || std::isspace(bytes[pos]) == 0) {
    throw ImageFormatError("malformed ppm header");
  }
  ++pos;
  Image image(w, h);
  if (bytes.size() - pos != image.pixels.size()) {
    throw ImageFormatError("ppm payload size mismatch");
  }
  std::memcpy(image.pixels.data(), bytes.data() + pos, image.pixels.size());
  check_image(image);
  return image;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPngMagic, 4) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw ImageFormatError("unrecognized image container");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

Image load_image(const std::filesystem::path& path) { return decode_image(read_file_bytes(path)); }

void save_image(const std::filesystem::path& path, const Image& image) {
  const auto ext = path.extension().string();
  if (ext == ".png") {
    write_file_bytes(path, encode_png(image));
  } else if (ext == ".ppm") {
    write_file_bytes(path, encode_ppm(image));
  } else {
    throw ImageFormatError("unsupported image extension '" + ext + "'");
  }
}

}  // namespace symguide
