#pragma once

// Brute-force query evaluation straight from sign records: no fact store, no
// index. Used to cross-check the indexed evaluator.

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "signgraph/query.hpp"
#include "signgraph/sign.hpp"

namespace oracle {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> attribute_values(const signgraph::SignPrototype& s, signgraph::AttributeKey key) {
  using K = signgraph::AttributeKey;
  std::vector<std::string> v;
  switch (key) {
    case K::plate: v.push_back(s.plate_shape.name); break;
    case K::bg: v.push_back(s.background_color.name); break;
    case K::fg:
      if (s.foreground_color) v.push_back(s.foreground_color->name);
      break;
    case K::border:
      if (s.border_color) v.push_back(s.border_color->name);
      break;
    case K::printed:
      for (const auto& p : s.printed_shapes) v.push_back(p.name);
      break;
    case K::icon:
      for (const auto& i : s.icons) v.push_back(i.name);
      break;
    case K::text:
      for (const auto& t : s.texts) v.push_back(t.raw);
      break;
    case K::text_cat:
      for (const auto& t : s.texts)
        if (t.category) v.push_back(t.category->name);
      break;
    case K::convention: v.push_back(s.convention.name.name); break;
    case K::region: v.push_back(s.region); break;
    case K::category:
      if (s.category) v.push_back(*s.category);
      break;
  }
  for (auto& x : v) x = lower(x);
  return v;
}

inline bool matches(const signgraph::SignPrototype& s, const signgraph::Clause& c) {
  for (const auto& value : attribute_values(s, c.key)) {
    if (c.op == signgraph::ClauseOp::equals ? value == c.value : value.find(c.value) != std::string::npos) {
      return true;
    }
  }
  return false;
}

/// Sorted ids of the signs satisfying every clause.
inline std::vector<std::string> linear_scan(const std::vector<signgraph::SignPrototype>& signs,
                                            const signgraph::AttributeQuery& q) {
  std::vector<std::string> out;
  for (const auto& s : signs) {
    bool all = !q.clauses.empty();
    for (const auto& c : q.clauses) all = all && matches(s, c);
    if (all) out.push_back(s.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
