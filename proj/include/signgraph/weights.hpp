#pragma once

// VPE1 weight files. All integers little-endian.
//
//   "VPE1" | u8 version = 0x01 | u32 tensor count
//   per tensor: u16 name length | name (UTF-8) | u8 rank | rank x u32 dims
//               | prod(dims) x f32, row-major
//   u32 CRC-32 (IEEE) of every preceding byte

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "signgraph/error.hpp"

namespace signgraph {

static_assert(std::endian::native == std::endian::little, "VPE1 codec assumes a little-endian host");
static_assert(sizeof(float) == 4);

inline constexpr std::string_view kWeightsMagic = "VPE1";
inline constexpr std::uint8_t kWeightsVersion = 0x01;

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  static Tensor zeros(std::vector<std::uint32_t> shape) {
    Tensor t{std::move(shape), {}};
    t.values.assign(t.element_count(), 0.0f);
    return t;
  }

  std::size_t element_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct TensorSpec {
  std::string_view name;
  std::vector<std::uint32_t> shape;
};

/// Tensors the encoder needs, with their exact shapes.
inline const std::vector<TensorSpec>& encoder_tensor_specs() {
  static const std::vector<TensorSpec> specs = {
      {"enc.conv1.w", {32, 3, 4, 4}},    {"enc.conv1.b", {32}},
      {"enc.conv2.w", {64, 32, 4, 4}},   {"enc.conv2.b", {64}},
      {"enc.conv3.w", {128, 64, 4, 4}},  {"enc.conv3.b", {128}},
      {"enc.conv4.w", {256, 128, 4, 4}}, {"enc.conv4.b", {256}},
      {"enc.mu.w", {300, 4096}},         {"enc.mu.b", {300}},
      {"enc.logvar.w", {300, 4096}},     {"enc.logvar.b", {300}},
  };
  return specs;
}

inline std::uint32_t crc32_ieee(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large files.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

template <class T>
void put_le(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  template <class T>
  T read(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw PositionedError(ErrorKind::format, pos_, std::string("truncated weight file: ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_weights(const std::vector<NamedTensor>& tensors) {
  std::string out(kWeightsMagic);
  out.push_back(static_cast<char>(kWeightsVersion));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (t.values.size() != t.element_count()) {
      throw Error(ErrorKind::validation, name + ": value count does not match shape");
    }
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(t.shape.size()));
    for (auto d : t.shape) detail::put_le<std::uint32_t>(out, d);
    out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(float));
  }
  detail::put_le<std::uint32_t>(out, crc32_ieee(out));
  return out;
}

/// Parses a VPE1 file into tensors, in file order. Checks structure and
/// checksum but not which tensors are present.
inline std::vector<NamedTensor> parse_weights(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.take(4, "magic") != kWeightsMagic) throw PositionedError(ErrorKind::format, 0, "bad magic");
  if (in.read<std::uint8_t>("version") != kWeightsVersion) {
    throw PositionedError(ErrorKind::format, 4, "unsupported weight file version");
  }
  const auto count = in.read<std::uint32_t>("tensor count");
  std::vector<NamedTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const auto name_len = in.read<std::uint16_t>("name length");
    nt.name = std::string(in.take(name_len, "tensor name"));
    const auto rank = in.read<std::uint8_t>("rank");
    std::size_t elements = 1;
    for (std::uint8_t r = 0; r < rank; ++r) {
      auto d = in.read<std::uint32_t>("dimension");
      nt.tensor.shape.push_back(d);
      elements *= d;
      if (elements > bytes.size()) {
        throw PositionedError(ErrorKind::format, in.pos(), "truncated weight file: tensor data");
      }
    }
    auto data = in.take(elements * sizeof(float), "tensor data");
    nt.tensor.values.resize(elements);
    std::memcpy(nt.tensor.values.data(), data.data(), data.size());
    tensors.push_back(std::move(nt));
  }
  const auto body_end = in.pos();
  const auto stored = in.read<std::uint32_t>("checksum");
  if (in.pos() != bytes.size()) {
    throw PositionedError(ErrorKind::format, in.pos(), "trailing bytes after checksum");
  }
  if (crc32_ieee(bytes.substr(0, body_end)) != stored) {
    throw PositionedError(ErrorKind::format, body_end, "checksum mismatch");
  }
  return tensors;
}

inline std::vector<NamedTensor> read_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read weight file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

inline void write_weights_file(const std::vector<NamedTensor>& tensors,
                               const std::filesystem::path& path) {
  auto bytes = serialize_weights(tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write weight file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace signgraph
