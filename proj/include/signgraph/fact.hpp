#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "signgraph/detail/strings.hpp"
#include "signgraph/error.hpp"

namespace signgraph {

/// Property identifiers of the ontology. Sign-level properties have the sign
/// id as subject; text-entry properties have a `<sign>#...` node as subject.
namespace predicates {
inline constexpr std::string_view convention = "has-convention";
inline constexpr std::string_view convention_variant = "has-convention-variant";
inline constexpr std::string_view region = "has-region";
inline constexpr std::string_view plate_shape = "has-plate-shape";
inline constexpr std::string_view background_color = "has-background-color";
inline constexpr std::string_view foreground_color = "has-foreground-color";
inline constexpr std::string_view border_color = "has-border-color";
inline constexpr std::string_view color = "has-color";
inline constexpr std::string_view icon_color = "has-icon-color";
inline constexpr std::string_view text_color = "has-text-color";
inline constexpr std::string_view shape_color = "has-shape-color";
inline constexpr std::string_view printed_shape = "has-printed-shape";
inline constexpr std::string_view icon = "has-icon";
inline constexpr std::string_view text = "has-text";
inline constexpr std::string_view text_category = "has-text-category";
inline constexpr std::string_view numeric_value = "has-numeric-value";
inline constexpr std::string_view unit = "has-unit";
inline constexpr std::string_view text_entry = "has-text-entry";
inline constexpr std::string_view raw_text = "has-raw-text";
inline constexpr std::string_view text_index = "has-text-index";
inline constexpr std::string_view source_text = "has-source-text";
inline constexpr std::string_view variant = "has-variant";
inline constexpr std::string_view category = "has-category";
inline constexpr std::string_view description = "has-description";
inline constexpr std::string_view prototype_image = "has-prototype-image";
inline constexpr std::string_view prototype_image_gray = "has-prototype-image-gray";
inline constexpr std::string_view equivalent_class = "equivalent-class";
inline constexpr std::string_view equivalent_feature = "equivalent-feature";

inline const std::set<std::string, std::less<>>& core() {
  static const std::set<std::string, std::less<>> all = {
      std::string(convention),   std::string(convention_variant), std::string(region),
      std::string(plate_shape),  std::string(background_color),   std::string(foreground_color),
      std::string(border_color), std::string(color),              std::string(icon_color),
      std::string(text_color),   std::string(shape_color),        std::string(printed_shape),
      std::string(icon),         std::string(text),               std::string(text_category),
      std::string(numeric_value), std::string(unit),              std::string(text_entry),
      std::string(raw_text),     std::string(text_index),         std::string(source_text),
      std::string(variant),      std::string(category),           std::string(description),
      std::string(prototype_image), std::string(prototype_image_gray),
      std::string(equivalent_class), std::string(equivalent_feature)};
  return all;
}
}  // namespace predicates

enum class Provenance : std::uint8_t { ingested, derived_by_rule, manual_alignment };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::ingested: return "ingested";
    case Provenance::derived_by_rule: return "derived-by-rule";
    case Provenance::manual_alignment: return "manual-alignment";
  }
  return "";
}

inline std::optional<Provenance> provenance_from_string(std::string_view s) {
  if (s == "ingested") return Provenance::ingested;
  if (s == "derived-by-rule") return Provenance::derived_by_rule;
  if (s == "manual-alignment") return Provenance::manual_alignment;
  return std::nullopt;
}

/// Object of a fact. Numbers are held in their shortest decimal rendering so
/// that equality and ordering are exact.
class FactObject {
 public:
  enum class Kind : std::uint8_t { entity, literal, number };

  FactObject() = default;

  static FactObject entity(std::string id) { return FactObject(Kind::entity, std::move(id)); }
  static FactObject literal(std::string text) { return FactObject(Kind::literal, std::move(text)); }
  static FactObject number(double value) {
    return FactObject(Kind::number, detail::format_number(value));
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& text() const noexcept { return text_; }
  bool is_entity() const noexcept { return kind_ == Kind::entity; }
  bool is_number() const noexcept { return kind_ == Kind::number; }
  double as_number() const { return detail::parse_number(text_).value_or(0.0); }

  friend auto operator<=>(const FactObject&, const FactObject&) = default;
  friend bool operator==(const FactObject&, const FactObject&) = default;

 private:
  FactObject(Kind kind, std::string text) : kind_(kind), text_(std::move(text)) {}

  Kind kind_ = Kind::literal;
  std::string text_;
};

inline char kind_code(FactObject::Kind kind) {
  switch (kind) {
    case FactObject::Kind::entity: return 'e';
    case FactObject::Kind::literal: return 'l';
    case FactObject::Kind::number: return 'n';
  }
  return '?';
}

struct Fact {
  std::string subject;
  std::string predicate;
  FactObject object;

  friend auto operator<=>(const Fact&, const Fact&) = default;
  friend bool operator==(const Fact&, const Fact&) = default;
};

inline Fact make_fact(std::string subject, std::string_view predicate, FactObject object) {
  return Fact{std::move(subject), std::string(predicate), std::move(object)};
}

/// Sign that owns a subject: the subject itself, or the part before `#` for
/// text-entry nodes.
inline std::string_view owner_of(std::string_view subject) {
  auto hash = subject.find('#');
  return hash == std::string_view::npos ? subject : subject.substr(0, hash);
}

/// Child → parent property edges. Closure is computed on demand.
class PropertyHierarchy {
 public:
  using Edge = std::pair<std::string, std::string>;

  PropertyHierarchy() = default;
  explicit PropertyHierarchy(std::set<Edge> edges) : edges_(std::move(edges)) {}

  void add_edge(std::string child, std::string parent) {
    edges_.emplace(std::move(child), std::move(parent));
  }

  const std::set<Edge>& edges() const noexcept { return edges_; }
  bool empty() const noexcept { return edges_.empty(); }

  std::set<std::string> properties() const {
    std::set<std::string> out;
    for (const auto& [child, parent] : edges_) {
      out.insert(child);
      out.insert(parent);
    }
    return out;
  }

  /// Returns a property on a cycle, if any.
  std::optional<std::string> find_cycle() const {
    enum class Mark { none, active, done };
    std::map<std::string, Mark> marks;
    std::optional<std::string> found;
    auto visit = [&](auto&& self, const std::string& node) -> void {
      if (found) return;
      auto& mark = marks[node];
      if (mark == Mark::done) return;
      if (mark == Mark::active) {
        found = node;
        return;
      }
      mark = Mark::active;
      for (const auto& parent : parents(node)) self(self, parent);
      marks[node] = Mark::done;
    };
    for (const auto& p : properties()) visit(visit, p);
    return found;
  }

  void require_acyclic() const {
    if (auto node = find_cycle()) {
      throw Error(ErrorKind::validation, "property hierarchy has a cycle through '" + *node + "'");
    }
  }

  std::vector<std::string> parents(const std::string& child) const {
    std::vector<std::string> out;
    for (auto it = edges_.lower_bound({child, std::string()}); it != edges_.end() && it->first == child;
         ++it) {
      out.push_back(it->second);
    }
    return out;
  }

  /// All strict ancestors of `property`, sorted. Requires an acyclic hierarchy.
  std::vector<std::string> ancestors(const std::string& property) const {
    std::set<std::string> seen;
    std::vector<std::string> stack = parents(property);
    while (!stack.empty()) {
      auto p = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(p).second) continue;
      for (auto& q : parents(p)) stack.push_back(std::move(q));
    }
    return {seen.begin(), seen.end()};
  }

 private:
  std::set<Edge> edges_;
};

/// Predicates a fact may use: the core ontology properties, properties named
/// in a hierarchy, and anything under a registered domain namespace prefix
/// (e.g. `gtsrb:`).
class PropertyVocabulary {
 public:
  PropertyVocabulary() = default;

  void register_property(std::string name) { extra_.insert(std::move(name)); }
  void register_namespace(std::string prefix) { namespaces_.insert(std::move(prefix)); }

  const std::set<std::string, std::less<>>& namespaces() const noexcept { return namespaces_; }

  bool knows(std::string_view predicate) const {
    if (predicates::core().count(predicate) || extra_.count(predicate)) return true;
    auto colon = predicate.find(':');
    return colon != std::string_view::npos && colon > 0 &&
           namespaces_.count(predicate.substr(0, colon + 1));
  }

 private:
  std::set<std::string, std::less<>> extra_;
  std::set<std::string, std::less<>> namespaces_;
};

}  // namespace signgraph
