#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <png.h>

#include "signgraph/detail/strings.hpp"
#include "signgraph/error.hpp"

namespace signgraph {

struct BoundingBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool valid() const { return width > 0 && height > 0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Interleaved 8-bit RGB image, row-major.
struct ImagePatch {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3
  std::optional<BoundingBox> source_bbox;

  ImagePatch() = default;
  ImagePatch(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w > 0 && h > 0 ? w * h * 3 : 0), fill) {}

  bool empty() const { return width <= 0 || height <= 0; }

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  friend bool operator==(const ImagePatch& a, const ImagePatch& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
  }
};

inline ImagePatch crop(const ImagePatch& image, const BoundingBox& box) {
  if (!box.valid()) throw Error(ErrorKind::validation, "zero-area bounding box");
  const int x0 = std::max(0, box.x), y0 = std::max(0, box.y);
  const int x1 = std::min(image.width, box.x + box.width);
  const int y1 = std::min(image.height, box.y + box.height);
  if (x1 <= x0 || y1 <= y0) throw Error(ErrorKind::validation, "bounding box outside the image");
  ImagePatch out(x1 - x0, y1 - y0);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      for (int c = 0; c < 3; ++c) out.at(x - x0, y - y0, c) = image.at(x, y, c);
    }
  }
  out.source_bbox = BoundingBox{x0, y0, x1 - x0, y1 - y0};
  return out;
}

namespace detail {

inline ImagePatch finish_png_read(png_image& img) {
  img.format = PNG_FORMAT_RGB;
  ImagePatch patch(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, patch.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorKind::format, "PNG decode failed: " + msg);
  }
  return patch;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace detail

inline ImagePatch decode_png(std::string_view bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::format, std::string("not a PNG image: ") + img.message);
  }
  return detail::finish_png_read(img);
}

inline std::string encode_png(const ImagePatch& patch) {
  if (patch.empty()) throw Error(ErrorKind::validation, "cannot encode an empty image");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(patch.width);
  img.height = static_cast<png_uint_32>(patch.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, patch.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::format, std::string("PNG encode failed: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, patch.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::format, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

inline ImagePatch load_png(const std::filesystem::path& path) {
  return decode_png(detail::read_file_bytes(path));
}

inline void save_png(const ImagePatch& patch, const std::filesystem::path& path) {
  auto bytes = encode_png(patch);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Headerless interleaved RGB with dimensions supplied by the caller.
inline ImagePatch load_raw_rgb(const std::filesystem::path& path, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::validation, "raw image needs positive size");
  auto bytes = detail::read_file_bytes(path);
  const auto expected = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::format, path.string() + ": expected " + std::to_string(expected) +
                                       " bytes, found " + std::to_string(bytes.size()));
  }
  ImagePatch patch(width, height);
  std::copy(bytes.begin(), bytes.end(), reinterpret_cast<char*>(patch.pixels.data()));
  return patch;
}

/// PNG by signature, otherwise `<name>.<W>x<H>.rgb` raw files.
inline ImagePatch load_image(const std::filesystem::path& path) {
  auto name = path.filename().string();
  auto ext = path.extension().string();
  if (ext == ".rgb") {
    auto stem = path.stem().string();  // name.WxH
    auto dot = stem.rfind('.');
    auto dims = dot == std::string::npos ? stem : stem.substr(dot + 1);
    auto x = dims.find('x');
    if (x == std::string::npos) throw Error(ErrorKind::format, name + ": raw files are named <name>.<W>x<H>.rgb");
    try {
      return load_raw_rgb(path, std::stoi(dims.substr(0, x)), std::stoi(dims.substr(x + 1)));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::format, name + ": raw files are named <name>.<W>x<H>.rgb");
    }
  }
  return load_png(path);
}

namespace detail {

inline int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+' || c == '-') return 62;
  if (c == '/' || c == '_') return 63;
  return -1;
}

}  // namespace detail

inline std::string base64_decode(std::string_view in) {
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=' || detail::is_space(c)) continue;
    int v = detail::base64_value(c);
    if (v < 0) throw Error(ErrorKind::format, "invalid base64 input");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

inline std::string base64_encode(std::string_view in) {
  static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (unsigned char c : in) {
    acc = (acc << 8) | c;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out.push_back(table[(acc >> bits) & 0x3f]);
    }
  }
  if (bits > 0) out.push_back(table[(acc << (6 - bits)) & 0x3f]);
  while (out.size() % 4) out.push_back('=');
  return out;
}

}  // namespace signgraph
