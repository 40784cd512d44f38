#pragma once

// Random query clauses for property tests over generated catalogues.

#include <array>
#include <optional>

#include "oracle/linear_scan.hpp"
#include "signgraph/detail/rng.hpp"
#include "signgraph/query.hpp"

namespace oracle {

using namespace signgraph;

// A random clause, drawn half the time from a value the sign actually has.
inline Clause random_clause(detail::SplitMix64& rng, const std::vector<SignPrototype>& signs) {
  const auto& vocab = VocabularySet::defaults();
  static constexpr std::array<AttributeKey, 8> keys = {AttributeKey::plate, AttributeKey::bg, AttributeKey::fg,
                                                       AttributeKey::border, AttributeKey::printed,
                                                       AttributeKey::icon, AttributeKey::text,
                                                       AttributeKey::text_cat};
  Clause c;
  c.key = keys[rng.below(keys.size())];
  const auto& s = signs[rng.below(signs.size())];
  auto have = oracle::attribute_values(s, c.key);
  if (c.key == AttributeKey::text && rng.chance(0.5)) {
    c.op = ClauseOp::contains;
    const std::string pool = have.empty() ? "speed limit" : have[rng.below(have.size())];
    auto from = rng.below(pool.size());
    c.value = pool.substr(from, 1 + rng.below(std::min<std::size_t>(4, pool.size() - from)));
    return c;
  }
  if (!have.empty() && rng.chance(0.5)) {
    c.value = have[rng.below(have.size())];
    return c;
  }
  auto vocab_kind = [&]() -> std::optional<VocabularyKind> {
    switch (c.key) {
      case AttributeKey::plate: return VocabularyKind::plate;
      case AttributeKey::printed: return VocabularyKind::printed;
      case AttributeKey::icon: return VocabularyKind::icon;
      case AttributeKey::text_cat: return VocabularyKind::text_category;
      case AttributeKey::text: return std::nullopt;
      default: return VocabularyKind::color;
    }
  }();
  if (!vocab_kind) {
    c.value = "speed limit 30";
  } else {
    const auto& members = vocab.members(*vocab_kind);
    c.value = members[rng.below(members.size())];
  }
  return c;
}

}  // namespace oracle
