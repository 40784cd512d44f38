#pragma once

// Snapshot layout (integers little-endian):
//   "RSKG" | u8 version = 0x01
//   u32 n | n bytes of canonical sign lines, sorted by id
//   u32 m | m bytes of fact lines, sorted by fact order
//   "END0"
// A fact line is a JSON array [subject, predicate, kind, object, provenance]
// with kind one of "e" (entity), "l" (literal), "n" (number).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "signgraph/knowledge_graph.hpp"

namespace signgraph {

inline constexpr std::string_view kSnapshotMagic = "RSKG";
inline constexpr std::uint8_t kSnapshotVersion = 0x01;
inline constexpr std::string_view kSnapshotTrailer = "END0";

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

inline std::string fact_line(const Fact& fact, Provenance prov) {
  Json arr = Json::array({fact.subject, fact.predicate, std::string(1, kind_code(fact.object.kind())),
                          fact.object.text(), std::string(to_string(prov))});
  return arr.dump();
}

inline std::pair<Fact, Provenance> parse_fact_line(std::string_view line, std::size_t offset) {
  auto fail = [&](const std::string& msg) -> std::pair<Fact, Provenance> {
    throw PositionedError(ErrorKind::format, offset, "bad fact line: " + msg);
  };
  Json arr;
  try {
    arr = Json::parse(line);
  } catch (const Json::parse_error& e) {
    return fail(e.what());
  }
  if (!arr.is_array() || arr.size() != 5) return fail("expected 5 fields");
  for (const auto& item : arr) {
    if (!item.is_string()) return fail("expected strings");
  }
  const auto kind = arr[2].get<std::string>();
  const auto text = arr[3].get<std::string>();
  FactObject object;
  if (kind == "e") {
    object = FactObject::entity(text);
  } else if (kind == "l") {
    object = FactObject::literal(text);
  } else if (kind == "n") {
    auto num = parse_number(text);
    if (!num) return fail("bad number");
    object = FactObject::number(*num);
  } else {
    return fail("bad object kind");
  }
  auto prov = provenance_from_string(arr[4].get<std::string>());
  if (!prov) return fail("bad provenance");
  return {Fact{arr[0].get<std::string>(), arr[1].get<std::string>(), std::move(object)}, *prov};
}

}  // namespace detail

/// Byte-deterministic serialization of `kg`.
inline std::string snapshot_bytes(const KnowledgeGraph& kg) {
  std::string signs, facts;
  for (const auto& [id, sign] : kg.signs()) {
    signs += render_sign_line(sign);
    signs += '\n';
  }
  for (const auto& [fact, prov] : kg.facts()) {
    facts += detail::fact_line(fact, prov);
    facts += '\n';
  }
  std::string out(kSnapshotMagic);
  out.push_back(static_cast<char>(kSnapshotVersion));
  detail::put_u32(out, static_cast<std::uint32_t>(signs.size()));
  out += signs;
  detail::put_u32(out, static_cast<std::uint32_t>(facts.size()));
  out += facts;
  out += kSnapshotTrailer;
  return out;
}

/// Inverse of snapshot_bytes. Errors carry the byte offset of the problem.
inline KnowledgeGraph load_snapshot_bytes(std::string_view bytes,
                                          const VocabularySet& vocab = VocabularySet::defaults()) {
  auto need = [&](std::size_t pos, std::size_t n, const char* what) {
    if (bytes.size() < pos + n) {
      throw PositionedError(ErrorKind::format, bytes.size(),
                            std::string("truncated snapshot: missing ") + what);
    }
  };
  need(0, 4, "magic");
  if (bytes.substr(0, 4) != kSnapshotMagic) throw PositionedError(ErrorKind::format, 0, "bad magic");
  need(4, 1, "version");
  if (static_cast<std::uint8_t>(bytes[4]) != kSnapshotVersion) {
    throw PositionedError(ErrorKind::format, 4, "unsupported snapshot version");
  }
  std::size_t pos = 5;

  auto section = [&](const char* what) {
    need(pos, 4, what);
    auto len = detail::get_u32(bytes, pos);
    pos += 4;
    need(pos, len, what);
    auto body = bytes.substr(pos, len);
    auto start = pos;
    pos += len;
    return std::pair{body, start};
  };

  KnowledgeGraph kg;
  auto [signs, signs_at] = section("sign section");
  auto [facts, facts_at] = section("fact section");
  need(pos, 4, "trailer");
  if (bytes.substr(pos, 4) != kSnapshotTrailer) {
    throw PositionedError(ErrorKind::format, pos, "bad trailer");
  }
  if (bytes.size() != pos + 4) {
    throw PositionedError(ErrorKind::format, pos + 4, "trailing bytes after snapshot");
  }

  auto for_lines = [](std::string_view body, std::size_t base, auto&& fn) {
    std::size_t start = 0;
    while (start < body.size()) {
      auto end = body.find('\n', start);
      if (end == std::string_view::npos) {
        throw PositionedError(ErrorKind::format, base + start, "unterminated line");
      }
      fn(body.substr(start, end - start), base + start);
      start = end + 1;
    }
  };

  for_lines(signs, signs_at, [&](std::string_view line, std::size_t at) {
    try {
      auto sign = parse_sign_line(line, vocab);
      if (kg.find_sign(sign.id)) throw PositionedError(ErrorKind::format, at, "duplicate sign");
      kg.restore_sign(std::move(sign));
    } catch (const FieldError& e) {
      throw PositionedError(ErrorKind::format, at, e.what());
    }
  });
  for_lines(facts, facts_at, [&](std::string_view line, std::size_t at) {
    auto [fact, prov] = detail::parse_fact_line(line, at);
    kg.restore_fact(std::move(fact), prov);
  });
  return kg;
}

inline void save_snapshot(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write snapshot " + path.string());
  auto bytes = snapshot_bytes(kg);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline KnowledgeGraph load_snapshot(const std::filesystem::path& path,
                                    const VocabularySet& vocab = VocabularySet::defaults()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read snapshot " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_snapshot_bytes(buffer.str(), vocab);
}

}  // namespace signgraph
