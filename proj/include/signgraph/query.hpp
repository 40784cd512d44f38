#pragma once

// Conjunctive attribute query language.
//
//   query  := clause ("AND" clause)*
//   clause := key "=" value | "text" "~" quoted-string
//   value  := bare-word | quoted-string
//
// Keys, values and the AND keyword are case-insensitive; values with
// spaces must be quoted. Quoted strings accept \" and \\ escapes.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signgraph/detail/strings.hpp"
#include "signgraph/error.hpp"
#include "signgraph/fact.hpp"

namespace signgraph {

enum class AttributeKey : std::uint8_t {
  plate,
  bg,
  fg,
  border,
  printed,
  icon,
  text,
  text_cat,
  convention,
  region,
  category,
};

inline constexpr std::array<AttributeKey, 11> kAllAttributeKeys = {
    AttributeKey::plate,    AttributeKey::bg,   AttributeKey::fg,       AttributeKey::border,
    AttributeKey::printed,  AttributeKey::icon, AttributeKey::text,     AttributeKey::text_cat,
    AttributeKey::convention, AttributeKey::region, AttributeKey::category,
};

inline constexpr std::string_view key_name(AttributeKey key) {
  switch (key) {
    case AttributeKey::plate: return "plate";
    case AttributeKey::bg: return "bg";
    case AttributeKey::fg: return "fg";
    case AttributeKey::border: return "border";
    case AttributeKey::printed: return "printed";
    case AttributeKey::icon: return "icon";
    case AttributeKey::text: return "text";
    case AttributeKey::text_cat: return "text_cat";
    case AttributeKey::convention: return "convention";
    case AttributeKey::region: return "region";
    case AttributeKey::category: return "category";
  }
  return "";
}

/// Sign-level property a key filters on.
inline constexpr std::string_view key_predicate(AttributeKey key) {
  switch (key) {
    case AttributeKey::plate: return predicates::plate_shape;
    case AttributeKey::bg: return predicates::background_color;
    case AttributeKey::fg: return predicates::foreground_color;
    case AttributeKey::border: return predicates::border_color;
    case AttributeKey::printed: return predicates::printed_shape;
    case AttributeKey::icon: return predicates::icon;
    case AttributeKey::text: return predicates::text;
    case AttributeKey::text_cat: return predicates::text_category;
    case AttributeKey::convention: return predicates::convention;
    case AttributeKey::region: return predicates::region;
    case AttributeKey::category: return predicates::category;
  }
  return "";
}

inline std::optional<AttributeKey> key_from_name(std::string_view raw) {
  auto name = detail::casefold(raw);
  for (auto key : kAllAttributeKeys) {
    if (name == key_name(key)) return key;
  }
  return std::nullopt;
}

enum class ClauseOp : std::uint8_t { equals, contains };

struct Clause {
  AttributeKey key = AttributeKey::plate;
  ClauseOp op = ClauseOp::equals;
  std::string value;  // case-folded

  friend auto operator<=>(const Clause&, const Clause&) = default;
  friend bool operator==(const Clause&, const Clause&) = default;
};

/// Non-empty conjunction of clauses. Order is kept for display but does not
/// affect evaluation.
struct AttributeQuery {
  std::vector<Clause> clauses;

  friend bool operator==(const AttributeQuery&, const AttributeQuery&) = default;
};

namespace detail {

inline bool bare_char(char c) {
  return !is_space(c) && c != '"' && c != '=' && c != '~' && c != '\\';
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) : s_(text) {}

  AttributeQuery parse() {
    AttributeQuery q;
    skip_ws();
    q.clauses.push_back(clause());
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) break;
      auto at = pos_;
      auto word = bare();
      if (casefold(word) != "and") fail(at, "expected AND");
      skip_ws();
      q.clauses.push_back(clause());
    }
    return q;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& msg) {
    throw PositionedError(ErrorKind::syntax, at, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  std::string_view bare() {
    auto start = pos_;
    while (pos_ < s_.size() && bare_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  std::string quoted() {
    auto start = pos_;
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size()) {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        out.push_back(s_[pos_++]);
      } else if (c == '"') {
        return out;
      } else {
        out.push_back(c);
      }
    }
    fail(start, "unterminated quoted string");
  }

  Clause clause() {
    auto key_at = pos_;
    if (pos_ >= s_.size()) fail(pos_, "expected attribute key");
    auto key_text = bare();
    if (key_text.empty()) fail(key_at, "expected attribute key");
    auto key = key_from_name(key_text);
    if (!key) fail(key_at, "unknown attribute key '" + std::string(key_text) + "'");
    skip_ws();
    if (pos_ >= s_.size()) fail(pos_, "expected '=' or '~'");
    Clause c;
    c.key = *key;
    auto op_at = pos_;
    if (s_[pos_] == '=') {
      c.op = ClauseOp::equals;
    } else if (s_[pos_] == '~') {
      c.op = ClauseOp::contains;
      if (*key != AttributeKey::text) fail(op_at, "contains-operator '~' is restricted to text");
    } else {
      fail(pos_, "expected '=' or '~'");
    }
    ++pos_;
    skip_ws();
    auto value_at = pos_;
    if (pos_ < s_.size() && s_[pos_] == '"') {
      c.value = casefold(quoted());
    } else {
      if (c.op == ClauseOp::contains) fail(value_at, "'~' requires a quoted string");
      auto v = bare();
      if (v.empty()) fail(value_at, "expected value");
      c.value = casefold(v);
    }
    return c;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Throws PositionedError (byte offset) on bad input.
inline AttributeQuery parse_query(std::string_view text) { return detail::QueryParser(text).parse(); }

/// Canonical text that parse_query maps back to an equal query.
inline std::string render_query(const AttributeQuery& q) {
  std::string out;
  for (const auto& c : q.clauses) {
    if (!out.empty()) out += " AND ";
    out += key_name(c.key);
    out += c.op == ClauseOp::contains ? "~" : "=";
    bool bare = c.op == ClauseOp::equals && !c.value.empty();
    for (char ch : c.value) bare = bare && detail::bare_char(ch);
    out += bare ? c.value : detail::quote(c.value);
  }
  return out;
}

}  // namespace signgraph
