#pragma once

// Procedural prototype images for generated signs, and degraded "field"
// patches derived from them. Used by the fixture generator and the ranker
// evaluation harness when no real template images are available.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "signgraph/detail/rng.hpp"
#include "signgraph/image.hpp"
#include "signgraph/sign.hpp"

namespace signgraph {

using Rgb = std::array<std::uint8_t, 3>;

inline Rgb color_rgb(const std::string& name) {
  static const std::map<std::string, Rgb> palette = {
      {"white", {245, 245, 245}},  {"black", {20, 20, 20}},     {"red", {200, 30, 35}},
      {"orange", {240, 130, 20}},  {"yellow", {250, 210, 20}},  {"green", {20, 120, 60}},
      {"blue", {25, 70, 170}},     {"brown", {110, 65, 30}},    {"purple", {110, 40, 140}},
      {"gray", {128, 128, 128}},   {"fluorescent-yellow-green", {200, 240, 40}},
  };
  auto it = palette.find(name);
  if (it != palette.end()) return it->second;
  // Regional vocabularies may name colors outside the default palette.
  auto h = detail::fnv1a(name);
  return {static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8),
          static_cast<std::uint8_t>(h >> 16)};
}

namespace detail {

// Inside test for a plate shape in normalized coordinates, (0,0) at the
// center, y pointing down, the plate spanning roughly [-1, 1].
inline bool inside_plate(const std::string& shape, double x, double y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (shape == "octagon") return ax <= 0.95 && ay <= 0.95 && ax + ay <= 1.35;
  if (shape == "diamond") return ax + ay <= 0.98;
  if (shape == "rectangle") return ax <= 0.7 && ay <= 0.95;
  if (shape == "square") return ax <= 0.9 && ay <= 0.9;
  if (shape == "circle") return x * x + y * y <= 0.93;
  if (shape == "triangle-up") return y <= 0.8 && y >= -0.95 && ax <= (y + 0.95) * 0.55;
  if (shape == "triangle-down") return y >= -0.8 && y <= 0.95 && ax <= (0.95 - y) * 0.55;
  if (shape == "pentagon") return ax <= 0.8 && y <= 0.95 && y >= -0.95 && (y >= -0.35 || ax <= (y + 0.95) * 1.35);
  if (shape == "shield") return ax <= 0.8 && y >= -0.9 && (y <= 0.2 || ax * ax + (y - 0.2) * (y - 0.2) * 0.9 <= 0.64);
  if (shape == "pennant") return x >= -0.95 && x <= 0.95 && ay <= 0.6 * (0.95 - x) / 1.9 + 0.02;
  if (shape == "cross") return (ax <= 0.95 && ay <= 0.3) || (ax <= 0.3 && ay <= 0.95);
  return ax <= 0.9 && ay <= 0.9;
}

class Canvas {
 public:
  explicit Canvas(int size, Rgb fill) : img_(size, size) {
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) set(x, y, fill);
  }

  int size() const { return img_.width; }
  ImagePatch& image() { return img_; }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
    for (int k = 0; k < 3; ++k) img_.at(x, y, k) = c[static_cast<std::size_t>(k)];
  }

  // Normalized -> pixel coordinates.
  double px(double nx) const { return (nx + 1.0) * 0.5 * size(); }

  template <class Pred>
  void fill_where(Rgb c, Pred&& pred) {
    for (int y = 0; y < size(); ++y) {
      for (int x = 0; x < size(); ++x) {
        double nx = (x + 0.5) / size() * 2.0 - 1.0;
        double ny = (y + 0.5) / size() * 2.0 - 1.0;
        if (pred(nx, ny)) set(x, y, c);
      }
    }
  }

  void rect(double x0, double y0, double x1, double y1, Rgb c) {
    fill_where(c, [&](double x, double y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; });
  }

 private:
  ImagePatch img_;
};

inline void draw_printed_shape(Canvas& cv, const std::string& shape, double cx, double cy, double r,
                               Rgb c) {
  if (shape == "arrow-left" || shape == "arrow-right" || shape == "arrow-up" || shape == "arrow-down" ||
      shape == "arrow-curved") {
    const double dir = (shape == "arrow-left" || shape == "arrow-up") ? -1.0 : 1.0;
    const bool vertical = shape == "arrow-up" || shape == "arrow-down";
    cv.fill_where(c, [&](double x, double y) {
      double u = (vertical ? y - cy : x - cx) * dir;  // along the arrow
      double v = vertical ? x - cx : y - cy;
      if (shape == "arrow-curved") v += 0.6 * u * u / r;
      bool shaft = u >= -r && u <= 0.2 * r && std::abs(v) <= 0.18 * r;
      bool head = u > 0.2 * r && u <= r && std::abs(v) <= (r - u) * 0.9;
      return shaft || head;
    });
  } else if (shape == "circle") {
    cv.fill_where(c, [&](double x, double y) {
      double d = std::hypot(x - cx, y - cy);
      return d <= r && d >= 0.75 * r;
    });
  } else if (shape == "diagonal-line") {
    cv.fill_where(c, [&](double x, double y) {
      return std::abs((x - cx) - (y - cy)) <= 0.2 * r && std::abs(x - cx) <= r && std::abs(y - cy) <= r;
    });
  } else if (shape == "bar") {
    cv.rect(cx - r, cy - 0.2 * r, cx + r, cy + 0.2 * r, c);
  } else if (shape == "cross") {
    cv.fill_where(c, [&](double x, double y) {
      double u = x - cx, v = y - cy;
      return (std::abs(u - v) <= 0.2 * r || std::abs(u + v) <= 0.2 * r) && std::abs(u) <= r &&
             std::abs(v) <= r;
    });
  } else {
    cv.rect(cx - 0.5 * r, cy - 0.5 * r, cx + 0.5 * r, cy + 0.5 * r, c);
  }
}

inline void draw_icon(Canvas& cv, const std::string& icon, double cx, double cy, double r, Rgb c) {
  // Each category gets a distinct silhouette built from a few primitives.
  auto disc = [&](double x0, double y0, double rad) {
    cv.fill_where(c, [&](double x, double y) { return std::hypot(x - x0, y - y0) <= rad; });
  };
  if (icon == "person") {
    disc(cx, cy - 0.6 * r, 0.22 * r);
    cv.rect(cx - 0.15 * r, cy - 0.35 * r, cx + 0.15 * r, cy + 0.4 * r, c);
    cv.rect(cx - 0.3 * r, cy + 0.4 * r, cx - 0.1 * r, cy + r, c);
    cv.rect(cx + 0.1 * r, cy + 0.4 * r, cx + 0.3 * r, cy + r, c);
  } else if (icon == "vehicle") {
    cv.rect(cx - r, cy - 0.2 * r, cx + r, cy + 0.4 * r, c);
    cv.rect(cx - 0.5 * r, cy - 0.6 * r, cx + 0.5 * r, cy - 0.2 * r, c);
    disc(cx - 0.55 * r, cy + 0.55 * r, 0.22 * r);
    disc(cx + 0.55 * r, cy + 0.55 * r, 0.22 * r);
  } else if (icon == "animal") {
    cv.fill_where(c, [&](double x, double y) {
      double u = (x - cx) / r, v = (y - cy) / r;
      return u * u / 0.5 + v * v / 0.12 <= 1.0;
    });
    disc(cx + 0.75 * r, cy - 0.45 * r, 0.2 * r);
    cv.rect(cx - 0.5 * r, cy + 0.2 * r, cx - 0.35 * r, cy + r, c);
    cv.rect(cx + 0.35 * r, cy + 0.2 * r, cx + 0.5 * r, cy + r, c);
  } else if (icon == "nature") {
    cv.fill_where(c, [&](double x, double y) {
      double u = x - cx, v = y - cy;
      return v <= 0.3 * r && v >= -r && std::abs(u) <= (v + r) * 0.6;
    });
    cv.rect(cx - 0.1 * r, cy + 0.3 * r, cx + 0.1 * r, cy + r, c);
  } else if (icon == "infrastructure") {
    cv.rect(cx - 0.35 * r, cy - r, cx + 0.35 * r, cy + r, c);
  } else {
    cv.fill_where(c, [&](double x, double y) { return std::abs(x - cx) + std::abs(y - cy) <= 0.8 * r; });
  }
}

// Text is drawn as a row of blocks whose widths follow the characters.
inline void draw_text(Canvas& cv, const std::string& raw, double cy, double height, Rgb c) {
  const std::size_t n = std::min<std::size_t>(raw.size(), 14);
  if (n == 0) return;
  const double width = 1.1;
  const double cell = width / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char ch = static_cast<unsigned char>(raw[i]);
    if (ch == ' ') continue;
    double fill = 0.35 + 0.6 * ((ch * 37u) % 7u) / 6.0;
    double x0 = -width / 2 + static_cast<double>(i) * cell;
    double top = cy - height / 2 + (ch % 3 == 0 ? height * 0.2 : 0.0);
    cv.rect(x0, top, x0 + cell * fill, cy + height / 2, c);
  }
}

}  // namespace detail

/// Deterministic synthetic template for `sign`: plate shape in the
/// background color with a border, printed shapes, icons and text in the
/// foreground color, and a small id-derived code block that keeps signs
/// with identical attributes distinguishable.
inline ImagePatch render_prototype(const SignPrototype& sign, int size = 64) {
  const Rgb backdrop = {140, 150, 145};
  const Rgb bg = color_rgb(sign.background_color.name);
  const Rgb fg = color_rgb(sign.foreground_color ? sign.foreground_color->name
                                                 : (sign.background_color.name == "black" ? "white" : "black"));
  const Rgb border = sign.border_color ? color_rgb(sign.border_color->name) : fg;
  const auto& shape = sign.plate_shape.name;

  detail::Canvas cv(size, backdrop);
  cv.fill_where(border, [&](double x, double y) { return detail::inside_plate(shape, x, y); });
  cv.fill_where(bg, [&](double x, double y) { return detail::inside_plate(shape, x / 0.88, y / 0.88); });

  double slot_y = -0.45;
  std::size_t i = 0;
  for (const auto& p : sign.printed_shapes) {
    double cx = sign.printed_shapes.size() == 1 ? 0.0 : -0.25 + 0.5 * static_cast<double>(i % 2);
    detail::draw_printed_shape(cv, p.name, cx, slot_y + 0.1 * static_cast<double>(i / 2), 0.22, fg);
    ++i;
  }
  i = 0;
  for (const auto& icon : sign.icons) {
    double cx = sign.icons.size() == 1 ? 0.0 : -0.25 + 0.5 * static_cast<double>(i % 2);
    detail::draw_icon(cv, icon.name, cx, -0.05, 0.22, fg);
    ++i;
  }
  double text_y = sign.icons.empty() ? -0.05 : 0.3;
  for (const auto& t : sign.texts) {
    if (text_y > 0.6) break;
    detail::draw_text(cv, t.raw, text_y, 0.16, fg);
    text_y += 0.25;
  }

  // 6x4 code block.
  const auto code = detail::fnv1a(sign.id);
  const double cell = 0.07;
  const double x0 = -3 * cell, y0 = 0.5;
  for (int b = 0; b < 24; ++b) {
    const int col = b % 6, row = b / 6;
    const Rgb c = ((code >> b) & 1u) ? fg : bg;
    cv.rect(x0 + col * cell, y0 + row * cell * 0.8, x0 + (col + 1) * cell - 0.01,
            y0 + (row + 1) * cell * 0.8 - 0.01, c);
  }
  return std::move(cv.image());
}

/// Imitates a cropped field observation of a prototype: random crop jitter,
/// resampling to a random size in [min_size, max_size], brightness/contrast
/// change and additive noise. Deterministic per seed.
inline ImagePatch field_patch(const ImagePatch& prototype, std::uint64_t seed, int min_size = 15,
                              int max_size = 96, double strength = 1.0) {
  detail::SplitMix64 rng(seed);
  const int size = min_size + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size - min_size + 1)));
  const double jitter = 0.08 * strength;
  const double sx0 = rng.uniform(-jitter, jitter) * prototype.width;
  const double sy0 = rng.uniform(-jitter, jitter) * prototype.height;
  const double scale = 1.0 + rng.uniform(-jitter, jitter);
  const double gain = 1.0 + rng.uniform(-0.3, 0.3) * strength;
  const double offset = rng.uniform(-30.0, 30.0) * strength;
  const double noise = 8.0 * strength;

  ImagePatch out(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double src_x = sx0 + (x + 0.5) * prototype.width * scale / size;
      double src_y = sy0 + (y + 0.5) * prototype.height * scale / size;
      int ix = std::clamp(static_cast<int>(src_x), 0, prototype.width - 1);
      int iy = std::clamp(static_cast<int>(src_y), 0, prototype.height - 1);
      for (int c = 0; c < 3; ++c) {
        double n = (rng.uniform() + rng.uniform() + rng.uniform() - 1.5) * noise;
        double v = prototype.at(ix, iy, c) * gain + offset + n;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace signgraph
