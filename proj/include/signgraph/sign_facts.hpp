#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "signgraph/fact.hpp"
#include "signgraph/sign.hpp"

namespace signgraph {

/// Node holding the structure of the sign's i-th text entry.
inline std::string text_node_id(const std::string& sign_id, std::size_t index) {
  return sign_id + "#text" + std::to_string(index);
}

/// Flattens a sign into facts. Text entries get one flat `has-text` fact on
/// the sign plus a node carrying position, category, number and unit, so
/// the list order survives the trip through an unordered fact set.
inline std::vector<Fact> sign_to_facts(const SignPrototype& sign) {
  namespace p = predicates;
  std::vector<Fact> out;
  const auto& s = sign.id;
  out.push_back(make_fact(s, p::convention, FactObject::entity(sign.convention.name.name)));
  if (sign.convention.regional_variant) {
    out.push_back(
        make_fact(s, p::convention_variant, FactObject::literal(*sign.convention.regional_variant)));
  }
  out.push_back(make_fact(s, p::region, FactObject::literal(sign.region)));
  out.push_back(make_fact(s, p::plate_shape, FactObject::entity(sign.plate_shape.name)));
  out.push_back(make_fact(s, p::background_color, FactObject::entity(sign.background_color.name)));
  if (sign.foreground_color) {
    out.push_back(make_fact(s, p::foreground_color, FactObject::entity(sign.foreground_color->name)));
  }
  if (sign.border_color) {
    out.push_back(make_fact(s, p::border_color, FactObject::entity(sign.border_color->name)));
  }
  for (const auto& shape : sign.printed_shapes) {
    out.push_back(make_fact(s, p::printed_shape, FactObject::entity(shape.name)));
  }
  for (const auto& icon : sign.icons) {
    out.push_back(make_fact(s, p::icon, FactObject::entity(icon.name)));
  }
  for (std::size_t i = 0; i < sign.texts.size(); ++i) {
    const auto& text = sign.texts[i];
    const auto node = text_node_id(s, i);
    out.push_back(make_fact(s, p::text, FactObject::literal(text.raw)));
    if (text.category) {
      out.push_back(make_fact(s, p::text_category, FactObject::entity(text.category->name)));
    }
    out.push_back(make_fact(s, p::text_entry, FactObject::entity(node)));
    out.push_back(make_fact(node, p::raw_text, FactObject::literal(text.raw)));
    out.push_back(make_fact(node, p::text_index, FactObject::number(static_cast<double>(i))));
    if (text.category) {
      out.push_back(make_fact(node, p::text_category, FactObject::entity(text.category->name)));
    }
    if (text.numeric_value) {
      out.push_back(make_fact(node, p::numeric_value, FactObject::number(*text.numeric_value)));
    }
    if (text.unit) out.push_back(make_fact(node, p::unit, FactObject::literal(*text.unit)));
  }
  for (const auto& variant : sign.variants) {
    out.push_back(make_fact(s, p::variant, FactObject::literal(variant)));
  }
  if (sign.category) out.push_back(make_fact(s, p::category, FactObject::literal(*sign.category)));
  out.push_back(make_fact(s, p::prototype_image, FactObject::literal(sign.prototype_image_color)));
  if (sign.prototype_image_gray) {
    out.push_back(
        make_fact(s, p::prototype_image_gray, FactObject::literal(*sign.prototype_image_gray)));
  }
  return out;
}

/// Rebuilds the sign `id` from facts produced by sign_to_facts. Facts about
/// other subjects, and derived text structure (nodes without a position),
/// are ignored.
template <class FactRange>
SignPrototype facts_to_sign(const std::string& id, const FactRange& facts) {
  namespace p = predicates;
  SignPrototype sign;
  sign.id = id;
  bool has_convention = false, has_region = false, has_plate = false, has_bg = false,
       has_image = false;

  struct NodeData {
    std::optional<std::size_t> index;
    TextEntry text;
  };
  std::map<std::string, NodeData> nodes;
  std::set<std::string> linked_nodes;

  auto single = [&](bool& flag, const Fact& f) {
    if (flag) throw Error(ErrorKind::validation, id + ": repeated " + f.predicate);
    flag = true;
  };

  for (const Fact& f : facts) {
    if (f.subject == id) {
      const auto& v = f.object.text();
      if (f.predicate == p::convention) {
        single(has_convention, f);
        sign.convention.name = ConventionName{v};
      } else if (f.predicate == p::convention_variant) {
        sign.convention.regional_variant = v;
      } else if (f.predicate == p::region) {
        single(has_region, f);
        sign.region = v;
      } else if (f.predicate == p::plate_shape) {
        single(has_plate, f);
        sign.plate_shape = PlateShape{v};
      } else if (f.predicate == p::background_color) {
        single(has_bg, f);
        sign.background_color = Color{v};
      } else if (f.predicate == p::foreground_color) {
        sign.foreground_color = Color{v};
      } else if (f.predicate == p::border_color) {
        sign.border_color = Color{v};
      } else if (f.predicate == p::printed_shape) {
        sign.printed_shapes.insert(PrintedShape{v});
      } else if (f.predicate == p::icon) {
        sign.icons.insert(IconCategory{v});
      } else if (f.predicate == p::text_entry) {
        linked_nodes.insert(v);
      } else if (f.predicate == p::variant) {
        sign.variants.insert(v);
      } else if (f.predicate == p::category) {
        sign.category = v;
      } else if (f.predicate == p::prototype_image) {
        single(has_image, f);
        sign.prototype_image_color = v;
      } else if (f.predicate == p::prototype_image_gray) {
        sign.prototype_image_gray = v;
      }
    } else if (owner_of(f.subject) == id && f.subject.size() > id.size()) {
      auto& node = nodes[f.subject];
      const auto& v = f.object.text();
      if (f.predicate == p::raw_text) {
        node.text.raw = v;
      } else if (f.predicate == p::text_index) {
        node.index = static_cast<std::size_t>(f.object.as_number());
      } else if (f.predicate == p::text_category) {
        node.text.category = TextCategory{v};
      } else if (f.predicate == p::numeric_value) {
        node.text.numeric_value = f.object.as_number();
      } else if (f.predicate == p::unit) {
        node.text.unit = v;
      }
    }
  }
  if (!has_convention || !has_region || !has_plate || !has_bg || !has_image) {
    throw Error(ErrorKind::validation, id + ": mandatory sign facts missing");
  }

  std::vector<std::pair<std::size_t, TextEntry>> ordered;
  for (auto& [node_id, node] : nodes) {
    if (!node.index || !linked_nodes.count(node_id)) continue;
    ordered.emplace_back(*node.index, std::move(node.text));
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].first != i) throw Error(ErrorKind::validation, id + ": text positions have gaps");
    sign.texts.push_back(std::move(ordered[i].second));
  }
  return sign;
}

}  // namespace signgraph
