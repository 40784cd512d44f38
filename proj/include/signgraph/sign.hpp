#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "signgraph/detail/strings.hpp"
#include "signgraph/error.hpp"
#include "signgraph/vocabulary.hpp"

namespace signgraph {

/// Printed text on a sign, optionally split into a category, a number and
/// a unit (e.g. raw "SPEED LIMIT 30", speed, 30, "miles per hour").
struct TextEntry {
  std::string raw;
  std::optional<TextCategory> category;
  std::optional<double> numeric_value;
  std::optional<std::string> unit;

  friend bool operator==(const TextEntry&, const TextEntry&) = default;
};

struct Convention {
  ConventionName name;
  std::optional<std::string> regional_variant;

  friend bool operator==(const Convention&, const Convention&) = default;
};

/// One canonical road sign of a convention manual.
struct SignPrototype {
  std::string id;
  Convention convention;
  std::string region;
  PlateShape plate_shape;
  Color background_color;
  std::optional<Color> foreground_color;
  std::optional<Color> border_color;
  std::set<PrintedShape> printed_shapes;
  std::set<IconCategory> icons;
  std::vector<TextEntry> texts;
  // Variant descriptors carry no order; kept sorted and unique.
  std::set<std::string> variants;
  std::optional<std::string> category;
  std::string prototype_image_color;
  std::optional<std::string> prototype_image_gray;

  friend bool operator==(const SignPrototype&, const SignPrototype&) = default;
};

/// Validation failure tied to one field of a record.
class FieldError : public Error {
 public:
  FieldError(ErrorKind kind, std::string field, std::string value, const std::string& reason)
      : Error(kind, field + ": " + reason + (value.empty() ? "" : " ('" + value + "')")),
        field_(std::move(field)),
        value_(std::move(value)),
        reason_(reason) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& value() const noexcept { return value_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string value_;
  std::string reason_;
};

/// Sign ids must be usable as fact subjects; `#` is reserved for nodes owned
/// by a sign (its text entries).
inline bool valid_sign_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == '#' || static_cast<unsigned char>(c) < 0x20 || c == ' ' || c == 0x7f) return false;
  }
  return true;
}

inline void validate_text_entry(const TextEntry& text, const VocabularySet& vocab) {
  if (detail::trim(text.raw).empty()) {
    throw FieldError(ErrorKind::validation, "texts.raw", text.raw, "empty text");
  }
  if (text.category && !vocab.contains(VocabularyKind::text_category, text.category->name)) {
    throw FieldError(ErrorKind::unknown_value, "texts.category", text.category->name,
                     "unknown-value");
  }
  if (text.numeric_value) {
    auto rendered = detail::format_number(*text.numeric_value);
    if (!detail::contains(text.raw, rendered)) {
      throw FieldError(ErrorKind::validation, "texts.numeric_value", rendered,
                       "number does not appear in raw text");
    }
  }
  if (text.unit && detail::trim(*text.unit).empty()) {
    throw FieldError(ErrorKind::validation, "texts.unit", "", "empty unit");
  }
}

/// Throws FieldError on the first violated invariant.
inline void validate(const SignPrototype& sign, const VocabularySet& vocab) {
  auto check_term = [&](const auto& term, const char* field) {
    using T = std::decay_t<decltype(term)>;
    if (!vocab.contains(T::kind, term.name)) {
      throw FieldError(ErrorKind::unknown_value, field, term.name, "unknown-value");
    }
  };
  if (!valid_sign_id(sign.id)) throw FieldError(ErrorKind::validation, "id", sign.id, "invalid id");
  check_term(sign.convention.name, "convention");
  if (sign.convention.regional_variant && sign.convention.regional_variant->empty()) {
    throw FieldError(ErrorKind::validation, "convention.regional_variant", "", "empty variant");
  }
  if (detail::trim(sign.region).empty()) {
    throw FieldError(ErrorKind::validation, "region", sign.region, "empty region");
  }
  check_term(sign.plate_shape, "plate_shape");
  check_term(sign.background_color, "background_color");
  if (sign.foreground_color) check_term(*sign.foreground_color, "foreground_color");
  if (sign.border_color) check_term(*sign.border_color, "border_color");
  for (const auto& shape : sign.printed_shapes) check_term(shape, "printed_shapes");
  for (const auto& icon : sign.icons) check_term(icon, "icons");
  for (const auto& text : sign.texts) validate_text_entry(text, vocab);
  for (const auto& variant : sign.variants) {
    if (detail::trim(variant).empty()) {
      throw FieldError(ErrorKind::validation, "variants", variant, "empty variant");
    }
  }
  if (sign.category && detail::trim(*sign.category).empty()) {
    throw FieldError(ErrorKind::validation, "category", "", "empty category");
  }
  if (detail::trim(sign.prototype_image_color).empty()) {
    throw FieldError(ErrorKind::validation, "prototype_image_color", "", "missing prototype image");
  }
  if (sign.prototype_image_gray && detail::trim(*sign.prototype_image_gray).empty()) {
    throw FieldError(ErrorKind::validation, "prototype_image_gray", "", "empty image reference");
  }
}

}  // namespace signgraph
