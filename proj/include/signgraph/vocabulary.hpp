#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "signgraph/detail/strings.hpp"
#include "signgraph/error.hpp"

namespace signgraph {

/// The closed vocabularies of the road sign ontology.
enum class VocabularyKind : std::uint8_t {
  plate,
  printed,
  color,
  icon,
  text_category,
  convention,
};

inline constexpr std::array<VocabularyKind, 6> kAllVocabularies = {
    VocabularyKind::plate,        VocabularyKind::printed,
    VocabularyKind::color,        VocabularyKind::icon,
    VocabularyKind::text_category, VocabularyKind::convention,
};

inline constexpr std::string_view vocabulary_name(VocabularyKind kind) {
  switch (kind) {
    case VocabularyKind::plate: return "plate";
    case VocabularyKind::printed: return "printed";
    case VocabularyKind::color: return "color";
    case VocabularyKind::icon: return "icon";
    case VocabularyKind::text_category: return "text-category";
    case VocabularyKind::convention: return "convention";
  }
  return "";
}

inline std::optional<VocabularyKind> vocabulary_from_name(std::string_view raw) {
  const std::string name = detail::fold_trim(raw);
  for (auto kind : kAllVocabularies) {
    if (name == vocabulary_name(kind)) return kind;
  }
  if (name == "plate-shape" || name == "plate_shape") return VocabularyKind::plate;
  if (name == "printed-shape" || name == "printed_shape") return VocabularyKind::printed;
  if (name == "icon-category") return VocabularyKind::icon;
  if (name == "text_category" || name == "text_cat") return VocabularyKind::text_category;
  return std::nullopt;
}

/// A member of one closed vocabulary, held by canonical name. The kind tag
/// keeps a color from being passed where a plate shape is expected.
template <VocabularyKind K>
struct Term {
  std::string name;

  static constexpr VocabularyKind kind = K;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;
};

using PlateShape = Term<VocabularyKind::plate>;
using PrintedShape = Term<VocabularyKind::printed>;
using Color = Term<VocabularyKind::color>;
using IconCategory = Term<VocabularyKind::icon>;
using TextCategory = Term<VocabularyKind::text_category>;
using ConventionName = Term<VocabularyKind::convention>;

namespace detail {

inline const std::vector<std::string>& default_members(VocabularyKind kind) {
  static const std::vector<std::string> plate = {
      "octagon", "diamond", "rectangle", "square", "circle", "triangle-up",
      "triangle-down", "pentagon", "shield", "pennant", "cross"};
  static const std::vector<std::string> printed = {
      "arrow-left", "arrow-right", "arrow-up", "arrow-down", "arrow-curved",
      "circle", "diagonal-line", "bar", "cross"};
  static const std::vector<std::string> color = {
      "white", "black", "red", "orange", "yellow", "green", "blue", "brown",
      "purple", "gray", "fluorescent-yellow-green"};
  static const std::vector<std::string> icon = {
      "animal", "infrastructure", "nature", "person", "vehicle", "other"};
  static const std::vector<std::string> text_category = {
      "speed", "height", "weight", "time", "name", "number"};
  static const std::vector<std::string> convention = {"vienna", "mutcd", "sadc"};
  switch (kind) {
    case VocabularyKind::plate: return plate;
    case VocabularyKind::printed: return printed;
    case VocabularyKind::color: return color;
    case VocabularyKind::icon: return icon;
    case VocabularyKind::text_category: return text_category;
    case VocabularyKind::convention: return convention;
  }
  return plate;
}

// Icon categories, text categories and conventions are fixed by the ontology;
// the other lists may be swapped for regional lists of the same size.
inline bool membership_is_fixed(VocabularyKind kind) {
  return kind == VocabularyKind::icon || kind == VocabularyKind::text_category ||
         kind == VocabularyKind::convention;
}

}  // namespace detail

class VocabularySet {
 public:
  VocabularySet() {
    for (auto kind : kAllVocabularies) lists_[index(kind)] = detail::default_members(kind);
  }

  static const VocabularySet& defaults() {
    static const VocabularySet instance;
    return instance;
  }

  /// Parses the sectioned schema text: `[vocabulary]` headers followed by
  /// one member per line. `#` starts a comment line. Every vocabulary must
  /// appear exactly once with the default cardinality.
  static VocabularySet parse_schema(std::string_view text) {
    VocabularySet set;
    std::array<bool, kAllVocabularies.size()> seen{};
    std::array<std::vector<std::string>, kAllVocabularies.size()> lists;
    std::optional<VocabularyKind> current;
    std::size_t line_no = 0;
    for (auto raw_line : detail::split(text, '\n')) {
      ++line_no;
      auto line = detail::trim(raw_line);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw PositionedError(ErrorKind::syntax, line_no, "unterminated section header");
        }
        auto kind = vocabulary_from_name(line.substr(1, line.size() - 2));
        if (!kind) {
          throw PositionedError(ErrorKind::syntax, line_no,
                                "unknown vocabulary '" + std::string(line) + "'");
        }
        if (seen[index(*kind)]) {
          throw PositionedError(ErrorKind::syntax, line_no, "vocabulary listed twice");
        }
        seen[index(*kind)] = true;
        current = kind;
        continue;
      }
      if (!current) {
        throw PositionedError(ErrorKind::syntax, line_no, "member outside of a section");
      }
      auto member = detail::casefold(line);
      auto& list = lists[index(*current)];
      if (std::find(list.begin(), list.end(), member) != list.end()) {
        throw PositionedError(ErrorKind::syntax, line_no, "duplicate member '" + member + "'");
      }
      list.push_back(std::move(member));
    }
    for (auto kind : kAllVocabularies) {
      const auto& defaults = detail::default_members(kind);
      auto& list = lists[index(kind)];
      const std::string name(vocabulary_name(kind));
      if (!seen[index(kind)]) throw Error(ErrorKind::validation, "schema lacks [" + name + "]");
      if (list.size() != defaults.size()) {
        throw Error(ErrorKind::validation,
                    "[" + name + "] must list " + std::to_string(defaults.size()) +
                        " members, found " + std::to_string(list.size()));
      }
      if (detail::membership_is_fixed(kind) &&
          !std::is_permutation(list.begin(), list.end(), defaults.begin())) {
        throw Error(ErrorKind::validation, "[" + name + "] members are fixed by the ontology");
      }
      set.lists_[index(kind)] = std::move(list);
    }
    return set;
  }

  static VocabularySet load_schema(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read vocabulary schema " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_schema(buffer.str());
  }

  std::string render_schema() const {
    std::string out;
    for (auto kind : kAllVocabularies) {
      if (!out.empty()) out += "\n";
      out += "[" + std::string(vocabulary_name(kind)) + "]\n";
      for (const auto& member : members(kind)) out += member + "\n";
    }
    return out;
  }

  const std::vector<std::string>& members(VocabularyKind kind) const {
    return lists_[index(kind)];
  }

  bool contains(VocabularyKind kind, std::string_view raw) const {
    const auto& list = members(kind);
    return std::find(list.begin(), list.end(), detail::fold_trim(raw)) != list.end();
  }

  /// Canonical member name for `raw` after trimming and case-folding.
  std::string parse_value(VocabularyKind kind, std::string_view raw) const {
    auto folded = detail::fold_trim(raw);
    const auto& list = members(kind);
    if (std::find(list.begin(), list.end(), folded) == list.end()) {
      throw VocabularyError(std::string(vocabulary_name(kind)), std::string(raw));
    }
    return folded;
  }

  template <VocabularyKind K>
  Term<K> parse(std::string_view raw) const {
    return Term<K>{parse_value(K, raw)};
  }

 private:
  static constexpr std::size_t index(VocabularyKind kind) {
    return static_cast<std::size_t>(kind);
  }

  std::array<std::vector<std::string>, kAllVocabularies.size()> lists_;
};

/// Resolves `raw` in the vocabulary called `vocabulary` ("plate", "color", ...).
inline std::string parse_vocabulary_value(const VocabularySet& set, std::string_view vocabulary,
                                          std::string_view raw) {
  auto kind = vocabulary_from_name(vocabulary);
  if (!kind) throw VocabularyError("vocabulary", std::string(vocabulary));
  return set.parse_value(*kind, raw);
}

}  // namespace signgraph
