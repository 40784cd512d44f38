#pragma once

// Golden parity files: one embedding per line,
//
//   name, crc32:<8 hex digits>, v1, v2, ..., v300
//
// `name` identifies an input image (`<name>.png` next to the file) and the
// hash is the CRC-32 of its decoded RGB bytes, row-major, so a mismatched
// input is caught before any embedding comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "signgraph/detail/strings.hpp"
#include "signgraph/image.hpp"
#include "signgraph/weights.hpp"

namespace signgraph {

struct GoldenEntry {
  std::string name;
  std::uint32_t input_crc = 0;
  std::vector<double> values;
};

inline std::uint32_t pixel_crc(const ImagePatch& patch) {
  return crc32_ieee(std::string_view(reinterpret_cast<const char*>(patch.pixels.data()), patch.pixels.size()));
}

inline std::string render_golden_line(const GoldenEntry& g) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "crc32:%08x", g.input_crc);
  std::string out = g.name + ", " + hash;
  for (double v : g.values) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ", %.9g", v);
    out += buf;
  }
  return out;
}

inline std::vector<GoldenEntry> parse_golden(std::istream& in) {
  std::vector<GoldenEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty() || detail::trim(line).front() == '#') continue;
    auto fields = detail::split(line, ',');
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::format, "golden line " + std::to_string(line_no) + ": " + msg);
    };
    if (fields.size() < 3) fail("expected name, hash and values");
    GoldenEntry g;
    g.name = std::string(detail::trim(fields[0]));
    auto hash = detail::trim(fields[1]);
    if (hash.substr(0, 6) != "crc32:" || hash.size() != 14) fail("bad input hash");
    g.input_crc = static_cast<std::uint32_t>(std::stoul(std::string(hash.substr(6)), nullptr, 16));
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto v = detail::parse_number(detail::trim(fields[i]));
      if (!v) fail("bad value '" + std::string(fields[i]) + "'");
      g.values.push_back(*v);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline std::vector<GoldenEntry> load_golden(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read golden file " + path.string());
  return parse_golden(in);
}

}  // namespace signgraph
