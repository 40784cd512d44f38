#pragma once

// Line-delimited JSON codec for sign records. One object per line, keys
// named after the SignPrototype fields.

#include <string>
#include <string_view>

#include <json.hpp>

#include "signgraph/sign.hpp"

namespace signgraph {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline OrderedJson text_to_json(const TextEntry& text) {
  OrderedJson out;
  out["raw"] = text.raw;
  if (text.category) out["category"] = text.category->name;
  if (text.numeric_value) out["numeric_value"] = *text.numeric_value;
  if (text.unit) out["unit"] = *text.unit;
  return out;
}

inline OrderedJson sign_to_json(const SignPrototype& sign) {
  OrderedJson out;
  out["id"] = sign.id;
  if (sign.convention.regional_variant) {
    out["convention"] = {{"name", sign.convention.name.name},
                         {"regional_variant", *sign.convention.regional_variant}};
  } else {
    out["convention"] = sign.convention.name.name;
  }
  out["region"] = sign.region;
  out["plate_shape"] = sign.plate_shape.name;
  out["background_color"] = sign.background_color.name;
  if (sign.foreground_color) out["foreground_color"] = sign.foreground_color->name;
  if (sign.border_color) out["border_color"] = sign.border_color->name;
  if (!sign.printed_shapes.empty()) {
    auto& arr = out["printed_shapes"] = OrderedJson::array();
    for (const auto& s : sign.printed_shapes) arr.push_back(s.name);
  }
  if (!sign.icons.empty()) {
    auto& arr = out["icons"] = OrderedJson::array();
    for (const auto& i : sign.icons) arr.push_back(i.name);
  }
  if (!sign.texts.empty()) {
    auto& arr = out["texts"] = OrderedJson::array();
    for (const auto& t : sign.texts) arr.push_back(text_to_json(t));
  }
  if (!sign.variants.empty()) {
    auto& arr = out["variants"] = OrderedJson::array();
    for (const auto& v : sign.variants) arr.push_back(v);
  }
  if (sign.category) out["category"] = *sign.category;
  out["prototype_image_color"] = sign.prototype_image_color;
  if (sign.prototype_image_gray) out["prototype_image_gray"] = *sign.prototype_image_gray;
  return out;
}

/// Canonical single-line rendering (no trailing newline).
inline std::string render_sign_line(const SignPrototype& sign) { return sign_to_json(sign).dump(); }

namespace detail {

inline std::string require_string(const Json& obj, const char* field, bool required = true) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    if (required) throw FieldError(ErrorKind::validation, field, "", "missing field");
    return {};
  }
  if (!it->is_string()) throw FieldError(ErrorKind::format, field, it->dump(), "expected string");
  return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const Json& obj, const char* field) {
  if (!obj.contains(field) || obj.at(field).is_null()) return std::nullopt;
  return require_string(obj, field);
}

template <VocabularyKind K>
Term<K> parse_term(const VocabularySet& vocab, const std::string& raw, const char* field) {
  try {
    return vocab.parse<K>(raw);
  } catch (const VocabularyError&) {
    throw FieldError(ErrorKind::unknown_value, field, raw, "unknown-value");
  }
}

template <VocabularyKind K>
std::set<Term<K>> parse_term_array(const Json& obj, const VocabularySet& vocab, const char* field) {
  std::set<Term<K>> out;
  if (!obj.contains(field) || obj.at(field).is_null()) return out;
  const auto& arr = obj.at(field);
  if (!arr.is_array()) throw FieldError(ErrorKind::format, field, arr.dump(), "expected array");
  for (const auto& item : arr) {
    if (!item.is_string()) throw FieldError(ErrorKind::format, field, item.dump(), "expected string");
    out.insert(parse_term<K>(vocab, item.get<std::string>(), field));
  }
  return out;
}

inline TextEntry parse_text(const Json& item, const VocabularySet& vocab) {
  TextEntry text;
  if (item.is_string()) {
    text.raw = item.get<std::string>();
  } else if (item.is_object()) {
    for (const auto& [key, _] : item.items()) {
      if (key != "raw" && key != "category" && key != "numeric_value" && key != "unit") {
        throw FieldError(ErrorKind::format, "texts." + key, "", "unknown field");
      }
    }
    text.raw = require_string(item, "raw");
    if (auto cat = optional_string(item, "category")) {
      text.category = parse_term<VocabularyKind::text_category>(vocab, *cat, "texts.category");
    }
    if (item.contains("numeric_value") && !item.at("numeric_value").is_null()) {
      const auto& num = item.at("numeric_value");
      if (!num.is_number()) {
        throw FieldError(ErrorKind::format, "texts.numeric_value", num.dump(), "expected number");
      }
      text.numeric_value = num.get<double>();
    }
    text.unit = optional_string(item, "unit");
  } else {
    throw FieldError(ErrorKind::format, "texts", item.dump(), "expected object or string");
  }
  validate_text_entry(text, vocab);
  return text;
}

}  // namespace detail

/// Builds and validates a sign from a parsed JSON object. Throws FieldError.
inline SignPrototype sign_from_json(const Json& obj, const VocabularySet& vocab) {
  static const std::set<std::string> known = {
      "id", "convention", "region", "plate_shape", "background_color", "foreground_color",
      "border_color", "printed_shapes", "icons", "texts", "variants", "category",
      "prototype_image_color", "prototype_image_gray"};
  if (!obj.is_object()) throw FieldError(ErrorKind::format, "record", "", "expected object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.count(key)) throw FieldError(ErrorKind::format, key, "", "unknown field");
  }

  SignPrototype sign;
  sign.id = detail::require_string(obj, "id");

  if (!obj.contains("convention")) {
    throw FieldError(ErrorKind::validation, "convention", "", "missing field");
  }
  const auto& conv = obj.at("convention");
  if (conv.is_string()) {
    sign.convention.name =
        detail::parse_term<VocabularyKind::convention>(vocab, conv.get<std::string>(), "convention");
  } else if (conv.is_object()) {
    sign.convention.name = detail::parse_term<VocabularyKind::convention>(
        vocab, detail::require_string(conv, "name"), "convention");
    sign.convention.regional_variant = detail::optional_string(conv, "regional_variant");
  } else {
    throw FieldError(ErrorKind::format, "convention", conv.dump(), "expected string or object");
  }

  sign.region = detail::require_string(obj, "region");
  sign.plate_shape = detail::parse_term<VocabularyKind::plate>(
      vocab, detail::require_string(obj, "plate_shape"), "plate_shape");
  sign.background_color = detail::parse_term<VocabularyKind::color>(
      vocab, detail::require_string(obj, "background_color"), "background_color");
  if (auto fg = detail::optional_string(obj, "foreground_color")) {
    sign.foreground_color = detail::parse_term<VocabularyKind::color>(vocab, *fg, "foreground_color");
  }
  if (auto border = detail::optional_string(obj, "border_color")) {
    sign.border_color = detail::parse_term<VocabularyKind::color>(vocab, *border, "border_color");
  }
  sign.printed_shapes =
      detail::parse_term_array<VocabularyKind::printed>(obj, vocab, "printed_shapes");
  sign.icons = detail::parse_term_array<VocabularyKind::icon>(obj, vocab, "icons");

  if (obj.contains("texts") && !obj.at("texts").is_null()) {
    const auto& arr = obj.at("texts");
    if (!arr.is_array()) throw FieldError(ErrorKind::format, "texts", arr.dump(), "expected array");
    for (const auto& item : arr) sign.texts.push_back(detail::parse_text(item, vocab));
  }
  if (obj.contains("variants") && !obj.at("variants").is_null()) {
    const auto& arr = obj.at("variants");
    if (!arr.is_array()) throw FieldError(ErrorKind::format, "variants", arr.dump(), "expected array");
    for (const auto& item : arr) {
      if (!item.is_string()) {
        throw FieldError(ErrorKind::format, "variants", item.dump(), "expected string");
      }
      sign.variants.insert(item.get<std::string>());
    }
  }
  sign.category = detail::optional_string(obj, "category");
  sign.prototype_image_color = detail::require_string(obj, "prototype_image_color");
  sign.prototype_image_gray = detail::optional_string(obj, "prototype_image_gray");

  validate(sign, vocab);
  return sign;
}

inline SignPrototype parse_sign_line(std::string_view line, const VocabularySet& vocab) {
  Json obj;
  try {
    obj = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FieldError(ErrorKind::syntax, "record", "", std::string("malformed record: ") + e.what());
  }
  return sign_from_json(obj, vocab);
}

}  // namespace signgraph
