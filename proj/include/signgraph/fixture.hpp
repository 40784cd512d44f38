#pragma once

// Seeded stand-in for a national sign catalogue: a sign document with a
// prescribed joint (plate shape, background color) distribution, and a query
// workload calibrated to a target search-space profile.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "signgraph/detail/rng.hpp"
#include "signgraph/evaluate.hpp"
#include "signgraph/knowledge_graph.hpp"
#include "signgraph/query.hpp"
#include "signgraph/sign_document.hpp"

namespace signgraph {

struct DistributionTarget {
  std::string plate_shape;
  std::string background_color;
  double proportion = 0;
};

/// Expected number of optional features per generated sign.
struct Richness {
  double printed_shapes = 0.7;
  double icons = 0.5;
  double texts = 0.8;
};

/// Target profile for the generated workload: bucket shares over the
/// search-space histogram (same buckets as SearchSpaceReport) and the mean
/// search-space size to aim for.
struct WorkloadTarget {
  std::size_t queries = 50;
  std::array<double, SearchSpaceReport::kBuckets> bucket_shares = {0.38, 0.16, 0.20, 0.12, 0.14, 0.0};
  double mean_size = 8.92;
};

struct FixtureSpec {
  std::size_t total_signs = 845;
  std::vector<DistributionTarget> targets = {{"rectangle", "white", 0.42}, {"diamond", "yellow", 0.14}};
  std::uint64_t seed = 42;
  Richness richness;
  WorkloadTarget workload;
  std::string region = "US";
  std::string convention = "mutcd";
  std::string id_prefix = "FX";
};

struct Fixture {
  std::vector<SignPrototype> signs;
  std::vector<AttributeQuery> workload;

  /// JSON Lines sign document.
  std::string sign_document() const {
    std::string out;
    for (const auto& s : signs) out += render_sign_line(s) + "\n";
    return out;
  }

  std::string workload_document() const {
    std::string out;
    for (const auto& q : workload) out += render_query(q) + "\n";
    return out;
  }
};

/// Sign counts per (plate, background) pair. Targets get round(p * total);
/// the remainder is spread evenly over every other pair, the leftover units
/// going to a seeded choice of pairs.
inline std::map<std::pair<std::string, std::string>, std::size_t> fixture_pair_counts(
    const FixtureSpec& spec, const VocabularySet& vocab = VocabularySet::defaults()) {
  double share = 0;
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  std::size_t assigned = 0;
  for (const auto& t : spec.targets) {
    if (!(t.proportion >= 0)) throw Error(ErrorKind::validation, "negative target proportion");
    vocab.parse_value(VocabularyKind::plate, t.plate_shape);
    vocab.parse_value(VocabularyKind::color, t.background_color);
    share += t.proportion;
    auto key = std::make_pair(t.plate_shape, t.background_color);
    if (counts.count(key)) throw Error(ErrorKind::validation, "duplicate distribution target");
    auto n = static_cast<std::size_t>(std::llround(t.proportion * static_cast<double>(spec.total_signs)));
    counts[key] = n;
    assigned += n;
  }
  if (share > 1.0 + 1e-12) throw Error(ErrorKind::validation, "target proportions exceed 1");
  if (assigned > spec.total_signs) throw Error(ErrorKind::validation, "rounded target counts exceed total");

  std::vector<std::pair<std::string, std::string>> others;
  for (const auto& p : vocab.members(VocabularyKind::plate)) {
    for (const auto& c : vocab.members(VocabularyKind::color)) {
      if (!counts.count({p, c})) others.emplace_back(p, c);
    }
  }
  const std::size_t rest = spec.total_signs - assigned;
  if (rest > 0 && others.empty()) throw Error(ErrorKind::validation, "no pairs left for the remainder");
  if (rest > 0) {
    detail::SplitMix64 rng(spec.seed ^ 0x70a12c0u);
    rng.shuffle(others);
    for (std::size_t i = 0; i < others.size(); ++i) {
      counts[others[i]] = rest / others.size() + (i < rest % others.size() ? 1 : 0);
    }
  }
  for (auto it = counts.begin(); it != counts.end();) {
    it = it->second == 0 ? counts.erase(it) : std::next(it);
  }
  return counts;
}

namespace detail {

struct TextTemplate {
  const char* pattern;  // '#' is replaced by the number
  const char* category;
  const char* unit;
  std::array<int, 6> numbers;
};

inline const std::vector<TextTemplate>& text_templates() {
  static const std::vector<TextTemplate> t = {
      {"SPEED LIMIT #", "speed", "mph", {15, 25, 30, 35, 45, 55}},
      {"# MPH", "speed", "mph", {10, 20, 25, 30, 40, 50}},
      {"MINIMUM SPEED #", "speed", "mph", {30, 35, 40, 45, 50, 55}},
      {"CLEARANCE # FT", "height", "ft", {10, 11, 12, 13, 14, 15}},
      {"WEIGHT LIMIT # TONS", "weight", "t", {3, 5, 8, 10, 15, 20}},
      {"# AM - 6 PM", "time", nullptr, {6, 7, 8, 9, 10, 11}},
      {"EXIT #", "number", nullptr, {1, 12, 23, 34, 45, 56}},
      {"ROUTE #", "number", nullptr, {9, 17, 66, 80, 95, 101}},
      {"MAIN ST", "name", nullptr, {}},
      {"SCHOOL", "name", nullptr, {}},
      {"DETOUR", "name", nullptr, {}},
      {"ONE WAY", "name", nullptr, {}},
      {"NO PARKING", nullptr, nullptr, {}},
      {"ROAD WORK AHEAD", nullptr, nullptr, {}},
      {"YIELD", nullptr, nullptr, {}},
      {"DO NOT ENTER", nullptr, nullptr, {}},
      {"LEFT LANE", "name", nullptr, {}},
      {"END", nullptr, nullptr, {}},
  };
  return t;
}

inline TextEntry make_text(SplitMix64& rng) {
  const auto& templates = text_templates();
  const auto& t = templates[rng.below(templates.size())];
  TextEntry e;
  std::string raw = t.pattern;
  auto hash = raw.find('#');
  if (hash != std::string::npos) {
    int n = t.numbers[rng.below(t.numbers.size())];
    raw.replace(hash, 1, std::to_string(n));
    e.numeric_value = n;
    if (t.unit) e.unit = t.unit;
  }
  e.raw = raw;
  if (t.category) e.category = TextCategory{t.category};
  return e;
}

// Poisson-ish count with the given mean, capped at 3.
inline std::size_t draw_count(SplitMix64& rng, double mean) {
  std::size_t n = 0;
  double p = mean / 3.0;
  for (int i = 0; i < 3; ++i) n += rng.chance(p) ? 1 : 0;
  return n;
}

template <VocabularyKind K>
std::set<Term<K>> draw_terms(SplitMix64& rng, const VocabularySet& vocab, std::size_t n) {
  std::set<Term<K>> out;
  const auto& members = vocab.members(K);
  for (std::size_t i = 0; i < n; ++i) out.insert(Term<K>{members[rng.below(members.size())]});
  return out;
}

}  // namespace detail

/// Deterministic sign set for `spec`, ordered by id.
inline std::vector<SignPrototype> generate_signs(const FixtureSpec& spec,
                                                 const VocabularySet& vocab = VocabularySet::defaults()) {
  const auto counts = fixture_pair_counts(spec, vocab);
  vocab.parse_value(VocabularyKind::convention, spec.convention);
  detail::SplitMix64 rng(spec.seed);
  const auto& colors = vocab.members(VocabularyKind::color);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(spec.total_signs).size()));

  std::vector<std::pair<std::string, std::string>> slots;
  for (const auto& [pair, n] : counts) slots.insert(slots.end(), n, pair);
  rng.shuffle(slots);

  std::vector<SignPrototype> signs;
  signs.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::string num = std::to_string(i + 1);
    SignPrototype s;
    s.id = spec.id_prefix + "-" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    s.convention = {ConventionName{spec.convention}, std::nullopt};
    s.region = spec.region;
    s.plate_shape = PlateShape{slots[i].first};
    s.background_color = Color{slots[i].second};
    if (rng.chance(0.9)) {
      std::string fg = slots[i].second;
      const std::string preferred = slots[i].second == "black" ? "white" : "black";
      while (fg == slots[i].second) fg = rng.chance(0.5) ? preferred : colors[rng.below(colors.size())];
      s.foreground_color = Color{fg};
    }
    if (rng.chance(0.4)) s.border_color = Color{colors[rng.below(colors.size())]};
    s.printed_shapes = detail::draw_terms<VocabularyKind::printed>(
        rng, vocab, detail::draw_count(rng, spec.richness.printed_shapes));
    s.icons = detail::draw_terms<VocabularyKind::icon>(rng, vocab, detail::draw_count(rng, spec.richness.icons));
    const auto n_text = detail::draw_count(rng, spec.richness.texts);
    for (std::size_t t = 0; t < n_text; ++t) s.texts.push_back(detail::make_text(rng));
    s.prototype_image_color = "prototypes/" + s.id + ".png";
    signs.push_back(std::move(s));
  }
  return signs;
}

namespace detail {

// Optional clauses a query may take from one sign.
inline std::vector<Clause> optional_clauses(const SignPrototype& s) {
  std::vector<Clause> out;
  auto eq = [&](AttributeKey k, const std::string& v) { out.push_back({k, ClauseOp::equals, casefold(v)}); };
  if (s.foreground_color) eq(AttributeKey::fg, s.foreground_color->name);
  if (s.border_color) eq(AttributeKey::border, s.border_color->name);
  for (const auto& p : s.printed_shapes) eq(AttributeKey::printed, p.name);
  for (const auto& i : s.icons) eq(AttributeKey::icon, i.name);
  for (const auto& t : s.texts) {
    if (t.category) eq(AttributeKey::text_cat, t.category->name);
    auto words = split_ws(t.raw);
    if (!words.empty()) out.push_back({AttributeKey::text, ClauseOp::contains, casefold(words.front())});
  }
  return out;
}

inline std::array<std::size_t, SearchSpaceReport::kBuckets> bucket_quotas(const WorkloadTarget& target) {
  // Largest-remainder rounding so quotas sum to the query count.
  std::array<std::size_t, SearchSpaceReport::kBuckets> quota{};
  std::array<double, SearchSpaceReport::kBuckets> rem{};
  double total_share = 0;
  for (auto s : target.bucket_shares) total_share += s;
  if (total_share <= 0) throw Error(ErrorKind::validation, "bucket shares must be positive");
  std::size_t given = 0;
  for (std::size_t b = 0; b < quota.size(); ++b) {
    double exact = target.bucket_shares[b] / total_share * static_cast<double>(target.queries);
    quota[b] = static_cast<std::size_t>(exact);
    rem[b] = exact - static_cast<double>(quota[b]);
    given += quota[b];
  }
  while (given < target.queries) {
    auto b = static_cast<std::size_t>(std::max_element(rem.begin(), rem.end()) - rem.begin());
    ++quota[b];
    rem[b] = -1;
    ++given;
  }
  return quota;
}

}  // namespace detail

/// Chooses `target.queries` distinct queries, each plate + bg plus one to
/// three optional clauses taken from one real sign, so that the histogram of
/// search-space sizes follows the target bucket shares and the mean size is
/// as close to the target mean as the candidates allow.
inline std::vector<AttributeQuery> calibrate_workload(const KnowledgeGraph& kg, const WorkloadTarget& target,
                                                      std::uint64_t seed) {
  struct Candidate {
    AttributeQuery query;
    std::size_t size;
    std::size_t order;
  };
  constexpr std::size_t kBuckets = SearchSpaceReport::kBuckets;
  std::array<std::vector<Candidate>, kBuckets> pool;
  std::set<std::string> seen;

  detail::SplitMix64 rng(seed ^ 0x3b1e5d7u);
  std::vector<const SignPrototype*> signs;
  for (const auto& [id, s] : kg.signs()) signs.push_back(&s);
  rng.shuffle(signs);

  std::size_t order = 0;
  for (const auto* s : signs) {
    const auto opts = detail::optional_clauses(*s);
    if (opts.empty()) continue;
    // A few random subsets of sizes 1..3 per sign.
    for (int attempt = 0; attempt < 6; ++attempt) {
      std::vector<Clause> chosen = opts;
      rng.shuffle(chosen);
      chosen.resize(std::min<std::size_t>(chosen.size(), 1 + rng.below(3)));
      std::sort(chosen.begin(), chosen.end(), [](const Clause& a, const Clause& b) {
        return std::tie(a.key, a.value) < std::tie(b.key, b.value);
      });
      AttributeQuery q;
      q.clauses.push_back({AttributeKey::plate, ClauseOp::equals, detail::casefold(s->plate_shape.name)});
      q.clauses.push_back({AttributeKey::bg, ClauseOp::equals, detail::casefold(s->background_color.name)});
      q.clauses.insert(q.clauses.end(), chosen.begin(), chosen.end());
      if (!seen.insert(render_query(q)).second) continue;
      auto size = evaluate(q, kg).size();
      if (auto b = SearchSpaceReport::bucket_of(size)) pool[*b].push_back({std::move(q), size, order++});
    }
  }

  auto quota = detail::bucket_quotas(target);
  // Shift quota away from buckets without enough candidates to the nearest
  // bucket that has spare ones.
  for (std::size_t b = 0; b < kBuckets; ++b) {
    while (quota[b] > pool[b].size()) {
      --quota[b];
      bool moved = false;
      for (std::size_t d = 1; d < kBuckets && !moved; ++d) {
        for (std::size_t nb : {b - d, b + d}) {
          if (nb < kBuckets && quota[nb] < pool[nb].size()) {
            ++quota[nb];
            moved = true;
            break;
          }
        }
      }
      // Small graphs may not support the full workload; it comes out shorter.
      (void)moved;
    }
  }

  // Start from the smallest candidates of each bucket, then swap in larger
  // ones while that brings the total closer to the target.
  std::array<std::vector<bool>, kBuckets> taken;
  long long total = 0;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    std::sort(pool[b].begin(), pool[b].end(), [](const Candidate& x, const Candidate& y) {
      return std::tie(x.size, x.order) < std::tie(y.size, y.order);
    });
    taken[b].assign(pool[b].size(), false);
    for (std::size_t i = 0; i < quota[b]; ++i) {
      taken[b][i] = true;
      total += static_cast<long long>(pool[b][i].size);
    }
  }
  const auto goal = std::llround(target.mean_size * static_cast<double>(target.queries));
  for (;;) {
    long long best_gap = std::llabs(goal - total);
    std::size_t best_b = kBuckets, best_out = 0, best_in = 0;
    for (std::size_t b = 0; b < kBuckets; ++b) {
      for (std::size_t out = 0; out < pool[b].size(); ++out) {
        if (!taken[b][out]) continue;
        for (std::size_t in = 0; in < pool[b].size(); ++in) {
          if (taken[b][in] || pool[b][in].size == pool[b][out].size) continue;
          long long next = total - static_cast<long long>(pool[b][out].size) +
                           static_cast<long long>(pool[b][in].size);
          if (std::llabs(goal - next) < best_gap) {
            best_gap = std::llabs(goal - next);
            best_b = b;
            best_out = out;
            best_in = in;
          }
        }
      }
    }
    if (best_b == kBuckets) break;
    taken[best_b][best_out] = false;
    taken[best_b][best_in] = true;
    total += static_cast<long long>(pool[best_b][best_in].size) -
             static_cast<long long>(pool[best_b][best_out].size);
  }

  std::vector<Candidate> picked;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    for (std::size_t i = 0; i < pool[b].size(); ++i) {
      if (taken[b][i]) picked.push_back(pool[b][i]);
    }
  }
  std::sort(picked.begin(), picked.end(), [](const Candidate& x, const Candidate& y) { return x.order < y.order; });
  std::vector<AttributeQuery> out;
  for (auto& c : picked) out.push_back(std::move(c.query));
  return out;
}

inline Fixture generate_fixture(const FixtureSpec& spec, const VocabularySet& vocab = VocabularySet::defaults()) {
  Fixture f;
  f.signs = generate_signs(spec, vocab);
  KnowledgeGraph kg;
  for (const auto& s : f.signs) kg.insert_sign(s, vocab);
  f.workload = calibrate_workload(kg, spec.workload, spec.seed);
  return f;
}

}  // namespace signgraph
