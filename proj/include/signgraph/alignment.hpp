#pragma once

// Alignment rules: property subsumption, category inference from plate
// shape and background color, text splitting, and manual equivalence links.
//
// Rules file layout (one rule per line, `#` comments):
//
//   [hierarchy]
//   has-icon-color -> has-foreground-color
//   [category]
//   octagon red -> stop
//   [text]
//   "SPEED LIMIT {number}" -> text="SPEED LIMIT" category=speed unit="miles per hour"
//   [manual]
//   speed-limit gtsrb:speed_limit equivalent-class

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "signgraph/knowledge_graph.hpp"

namespace signgraph {

/// One piece of a text pattern.
struct PatternToken {
  enum class Kind : std::uint8_t { literal, number, time_range };
  Kind kind = Kind::literal;
  std::string word;  // folded literal word

  friend bool operator==(const PatternToken&, const PatternToken&) = default;
};

struct TextMatch {
  std::optional<double> number;
  std::optional<std::string> time_range;
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class TextCursor {
 public:
  explicit TextCursor(std::string_view s) : s_(s) {}

  std::size_t pos() const { return pos_; }
  void reset(std::size_t pos) { pos_ = pos; }
  bool done() const { return pos_ >= s_.size(); }
  bool at_boundary() const { return done() || s_[pos_] == ' '; }

  bool eat(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) return false;
    pos_ += lit.size();
    return true;
  }

  void skip_space() {
    while (!done() && s_[pos_] == ' ') ++pos_;
  }

  std::optional<std::string_view> number() {
    auto start = pos_;
    while (!done() && is_digit(s_[pos_])) ++pos_;
    if (pos_ == start) return std::nullopt;
    if (!done() && s_[pos_] == '.' && pos_ + 1 < s_.size() && is_digit(s_[pos_ + 1])) {
      ++pos_;
      while (!done() && is_digit(s_[pos_])) ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  // H[:MM][ ](am|pm)?
  bool clock() {
    auto start = pos_;
    std::size_t digits = 0;
    while (!done() && is_digit(s_[pos_]) && digits < 2) ++pos_, ++digits;
    if (digits == 0) return reset(start), false;
    if (!done() && s_[pos_] == ':') {
      ++pos_;
      if (pos_ + 2 > s_.size() || !is_digit(s_[pos_]) || !is_digit(s_[pos_ + 1])) {
        return reset(start), false;
      }
      pos_ += 2;
    }
    auto before_meridiem = pos_;
    skip_space();
    if (!eat("am") && !eat("pm") && !eat("a.m.") && !eat("p.m.")) reset(before_meridiem);
    return true;
  }

  std::optional<std::string_view> time_range() {
    auto start = pos_;
    if (!clock()) return std::nullopt;
    skip_space();
    if (!eat("-") && !eat("to")) return reset(start), std::nullopt;
    skip_space();
    if (!clock()) return reset(start), std::nullopt;
    return s_.substr(start, pos_ - start);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Whitespace-separated pattern of literal words and `{number}` /
/// `{time-range}` placeholders. Matching is anchored at both ends,
/// case-insensitive, and insensitive to whitespace runs.
class TextPattern {
 public:
  TextPattern() = default;

  static TextPattern parse(std::string_view source) {
    TextPattern p;
    p.source_ = std::string(source);
    for (auto word : detail::split_ws(source)) {
      if (word.front() == '{') {
        if (word == "{number}") {
          p.tokens_.push_back({PatternToken::Kind::number, {}});
        } else if (word == "{time-range}") {
          p.tokens_.push_back({PatternToken::Kind::time_range, {}});
        } else {
          throw Error(ErrorKind::syntax, "unknown placeholder " + std::string(word));
        }
      } else {
        p.tokens_.push_back({PatternToken::Kind::literal, detail::casefold(word)});
      }
    }
    if (p.tokens_.empty()) throw Error(ErrorKind::syntax, "empty text pattern");
    return p;
  }

  const std::string& source() const noexcept { return source_; }
  const std::vector<PatternToken>& tokens() const noexcept { return tokens_; }

  std::optional<TextMatch> match(std::string_view raw) const {
    const auto text = detail::casefold(detail::normalize_ws(raw));
    detail::TextCursor cur(text);
    TextMatch m;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i > 0 && !cur.eat(" ")) return std::nullopt;
      const auto& tok = tokens_[i];
      switch (tok.kind) {
        case PatternToken::Kind::literal:
          if (!cur.eat(tok.word)) return std::nullopt;
          break;
        case PatternToken::Kind::number: {
          auto digits = cur.number();
          if (!digits) return std::nullopt;
          if (!m.number) m.number = detail::parse_number(*digits);
          break;
        }
        case PatternToken::Kind::time_range: {
          auto range = cur.time_range();
          if (!range) return std::nullopt;
          if (!m.time_range) m.time_range = std::string(*range);
          break;
        }
      }
      if (!cur.at_boundary()) return std::nullopt;
    }
    if (!cur.done()) return std::nullopt;
    return m;
  }

  friend bool operator==(const TextPattern& a, const TextPattern& b) { return a.tokens_ == b.tokens_; }

 private:
  std::string source_;
  std::vector<PatternToken> tokens_;
};

struct CategoryRule {
  PlateShape plate_shape;
  Color background_color;
  std::string category;
};

struct TextRule {
  TextPattern pattern;
  std::string text;
  std::optional<TextCategory> category;
  std::optional<std::string> unit;
};

enum class LinkKind : std::uint8_t { equivalent_class, equivalent_feature };

struct ManualLink {
  std::string local_id;
  std::string external_id;
  LinkKind kind = LinkKind::equivalent_class;
};

struct AlignmentRuleSet {
  PropertyHierarchy hierarchy;
  std::vector<CategoryRule> category_rules;
  std::vector<TextRule> text_rules;
  std::vector<ManualLink> manual_links;

  bool empty() const {
    return hierarchy.empty() && category_rules.empty() && text_rules.empty() && manual_links.empty();
  }

  static AlignmentRuleSet parse(std::string_view text,
                                const VocabularySet& vocab = VocabularySet::defaults());

  static AlignmentRuleSet load(const std::filesystem::path& path,
                               const VocabularySet& vocab = VocabularySet::defaults()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read rules file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), vocab);
  }
};

namespace detail {

// Splits a rule line into words, keeping "quoted strings" (backslash escapes
// allowed) and key="quoted" pairs intact. Quotes are removed.
inline std::vector<std::string> rule_words(std::string_view line, std::size_t line_no) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    std::string word;
    while (i < line.size() && !is_space(line[i])) {
      if (line[i] == '"') {
        ++i;
        bool closed = false;
        while (i < line.size()) {
          char c = line[i++];
          if (c == '\\' && i < line.size()) {
            word.push_back(line[i++]);
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            word.push_back(c);
          }
        }
        if (!closed) throw PositionedError(ErrorKind::syntax, line_no, "unterminated string");
      } else {
        word.push_back(line[i++]);
      }
    }
    words.push_back(std::move(word));
  }
  return words;
}

}  // namespace detail

inline AlignmentRuleSet AlignmentRuleSet::parse(std::string_view text, const VocabularySet& vocab) {
  enum class Section { none, hierarchy, category, text, manual };
  AlignmentRuleSet rules;
  Section section = Section::none;
  std::size_t line_no = 0;
  for (auto raw_line : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      auto name = detail::fold_trim(line);
      if (name == "[hierarchy]") section = Section::hierarchy;
      else if (name == "[category]") section = Section::category;
      else if (name == "[text]") section = Section::text;
      else if (name == "[manual]") section = Section::manual;
      else throw PositionedError(ErrorKind::syntax, line_no, "unknown section " + std::string(line));
      continue;
    }
    auto words = detail::rule_words(line, line_no);
    auto fail = [&](const std::string& msg) { throw PositionedError(ErrorKind::syntax, line_no, msg); };
    try {
      switch (section) {
        case Section::none:
          fail("rule outside of a section");
          break;
        case Section::hierarchy:
          if (words.size() != 3 || words[1] != "->") fail("expected: child -> parent");
          rules.hierarchy.add_edge(detail::casefold(words[0]), detail::casefold(words[2]));
          break;
        case Section::category:
          if (words.size() != 4 || words[2] != "->") fail("expected: plate color -> category");
          rules.category_rules.push_back({vocab.parse<VocabularyKind::plate>(words[0]),
                                          vocab.parse<VocabularyKind::color>(words[1]), words[3]});
          break;
        case Section::text: {
          if (words.size() < 3 || words[1] != "->") fail("expected: \"pattern\" -> text=...");
          TextRule rule;
          rule.pattern = TextPattern::parse(words[0]);
          bool has_text = false;
          for (std::size_t i = 2; i < words.size(); ++i) {
            auto eq = words[i].find('=');
            if (eq == std::string::npos) fail("expected key=value, got " + words[i]);
            auto key = detail::casefold(words[i].substr(0, eq));
            auto value = words[i].substr(eq + 1);
            if (key == "text") {
              if (detail::trim(value).empty()) fail("empty output text");
              rule.text = value;
              has_text = true;
            } else if (key == "category") {
              rule.category = vocab.parse<VocabularyKind::text_category>(value);
            } else if (key == "unit") {
              rule.unit = value;
            } else {
              fail("unknown output key " + key);
            }
          }
          if (!has_text) fail("text rule needs text=...");
          rules.text_rules.push_back(std::move(rule));
          break;
        }
        case Section::manual: {
          if (words.size() != 3) fail("expected: local-id external-id link-kind");
          auto kind = detail::casefold(words[2]);
          LinkKind link;
          if (kind == "equivalent-class") link = LinkKind::equivalent_class;
          else if (kind == "equivalent-feature") link = LinkKind::equivalent_feature;
          else fail("unknown link kind " + words[2]);
          rules.manual_links.push_back({words[0], words[1], link});
          break;
        }
      }
    } catch (const PositionedError&) {
      throw;
    } catch (const Error& e) {
      throw PositionedError(e.kind(), line_no, e.what());
    }
  }
  return rules;
}

namespace detail {

inline std::string derived_text_node(const std::string& sign_id, const std::string& source) {
  return sign_id + "#rule-text[" + source + "]";
}

}  // namespace detail

/// Derives facts from `rules` until nothing new appears and returns the
/// number of facts added. Existing facts are never removed, so a second
/// call returns 0. A cyclic hierarchy is rejected before any change.
inline std::size_t apply_alignment(KnowledgeGraph& kg, const AlignmentRuleSet& rules) {
  namespace p = predicates;
  rules.hierarchy.require_acyclic();
  for (const auto& prop : rules.hierarchy.properties()) kg.properties().register_property(prop);
  for (const auto& link : rules.manual_links) {
    auto colon = link.external_id.find(':');
    if (colon != std::string::npos && colon > 0) {
      kg.properties().register_namespace(link.external_id.substr(0, colon + 1));
    }
  }

  std::size_t added = 0;
  auto add = [&](Fact f, Provenance prov) {
    if (kg.add_fact(std::move(f), prov)) ++added;
  };

  std::map<std::string, std::vector<std::string>> ancestors;
  for (const auto& prop : rules.hierarchy.properties()) {
    ancestors[prop] = rules.hierarchy.ancestors(prop);
  }

  for (;;) {
    const auto before = added;

    if (!ancestors.empty()) {
      std::vector<Fact> lifted;
      for (const auto& [fact, _] : kg.facts()) {
        auto it = ancestors.find(fact.predicate);
        if (it == ancestors.end()) continue;
        for (const auto& parent : it->second) lifted.push_back({fact.subject, parent, fact.object});
      }
      for (auto& f : lifted) add(std::move(f), Provenance::derived_by_rule);
    }

    for (const auto& rule : rules.category_rules) {
      const auto& by_plate = kg.lookup(p::plate_shape, rule.plate_shape.name);
      const auto& by_bg = kg.lookup(p::background_color, rule.background_color.name);
      std::vector<std::string> hits;
      std::set_intersection(by_plate.begin(), by_plate.end(), by_bg.begin(), by_bg.end(),
                            std::back_inserter(hits));
      for (const auto& id : hits) {
        add(make_fact(id, p::category, FactObject::literal(rule.category)), Provenance::derived_by_rule);
      }
    }

    if (!rules.text_rules.empty()) {
      std::vector<std::pair<std::string, std::string>> texts;
      for (const auto& [id, _] : kg.signs()) {
        for (const auto& obj : kg.objects(id, p::text)) texts.emplace_back(id, obj.text());
      }
      for (const auto& [id, raw] : texts) {
        for (const auto& rule : rules.text_rules) {
          auto m = rule.pattern.match(raw);
          if (!m) continue;
          const auto node = detail::derived_text_node(id, raw);
          const auto prov = Provenance::derived_by_rule;
          add(make_fact(id, p::text, FactObject::literal(rule.text)), prov);
          add(make_fact(id, p::text_entry, FactObject::entity(node)), prov);
          add(make_fact(node, p::source_text, FactObject::literal(raw)), prov);
          add(make_fact(node, p::raw_text, FactObject::literal(rule.text)), prov);
          if (m->number) add(make_fact(node, p::numeric_value, FactObject::number(*m->number)), prov);
          if (rule.unit) add(make_fact(node, p::unit, FactObject::literal(*rule.unit)), prov);
          if (rule.category) {
            add(make_fact(node, p::text_category, FactObject::entity(rule.category->name)), prov);
            add(make_fact(id, p::text_category, FactObject::entity(rule.category->name)), prov);
          }
          break;  // first matching rule wins
        }
      }
    }

    for (const auto& link : rules.manual_links) {
      auto pred = link.kind == LinkKind::equivalent_class ? p::equivalent_class : p::equivalent_feature;
      add(make_fact(link.local_id, pred, FactObject::entity(link.external_id)),
          Provenance::manual_alignment);
    }

    if (added == before) break;
  }
  return added;
}

}  // namespace signgraph
