#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include "signgraph/knowledge_graph.hpp"
#include "signgraph/query.hpp"

namespace signgraph {

/// Signs matching a query, ascending by id, without duplicates.
struct CandidateSet {
  AttributeQuery query;
  std::vector<std::string> sign_ids;

  std::size_t size() const noexcept { return sign_ids.size(); }
  bool empty() const noexcept { return sign_ids.empty(); }

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

namespace detail {

inline KnowledgeGraph::IdSet clause_matches(const KnowledgeGraph& kg, const Clause& c) {
  const auto predicate = key_predicate(c.key);
  if (c.op == ClauseOp::equals) return kg.lookup(predicate, c.value);
  KnowledgeGraph::IdSet out;
  for (const auto& [value, ids] : kg.index(predicate)) {
    if (contains(value, c.value)) out.insert(ids.begin(), ids.end());
  }
  return out;
}

}  // namespace detail

/// Signs satisfying every clause. Equality clauses on multi-valued
/// attributes match when any value matches; `text~` is a case-folded
/// substring test over the sign's texts.
inline CandidateSet evaluate(const AttributeQuery& query, const KnowledgeGraph& kg) {
  CandidateSet result{query, {}};
  if (query.clauses.empty()) return result;

  std::vector<KnowledgeGraph::IdSet> sets;
  sets.reserve(query.clauses.size());
  for (const auto& c : query.clauses) {
    sets.push_back(detail::clause_matches(kg, c));
    if (sets.back().empty()) return result;
  }
  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  for (const auto& id : sets.front()) {
    bool all = std::all_of(sets.begin() + 1, sets.end(), [&](const auto& s) { return s.count(id) > 0; });
    if (all) result.sign_ids.push_back(id);
  }
  return result;
}

/// Search-space size distribution over a query workload.
struct SearchSpaceReport {
  static constexpr std::size_t kBuckets = 6;
  static constexpr std::array<const char*, kBuckets> kBucketLabels = {
      "1-5", "6-10", "11-15", "16-20", "21-25", ">25"};

  std::vector<std::size_t> per_query_sizes;
  std::size_t total_signs = 0;
  double mean = 0;
  double stdev = 0;  // sample (n-1) estimator; 0 for a single query
  std::array<std::size_t, kBuckets> histogram{};
  std::size_t empty_queries = 0;  // size 0, outside every bucket
  double reduction_percent = 0;

  /// Bucket for a size, or nullopt for 0.
  static std::optional<std::size_t> bucket_of(std::size_t size) {
    if (size == 0) return std::nullopt;
    if (size > 25) return kBuckets - 1;
    return (size - 1) / 5;
  }
};

/// Aggregates sizes exactly as search_space_stats does.
inline SearchSpaceReport summarize_sizes(std::vector<std::size_t> sizes, std::size_t total_signs) {
  if (sizes.empty()) throw Error(ErrorKind::validation, "empty query workload");
  SearchSpaceReport r;
  r.per_query_sizes = std::move(sizes);
  r.total_signs = total_signs;
  const double n = static_cast<double>(r.per_query_sizes.size());
  double sum = 0;
  for (auto s : r.per_query_sizes) {
    sum += static_cast<double>(s);
    if (auto b = SearchSpaceReport::bucket_of(s)) {
      ++r.histogram[*b];
    } else {
      ++r.empty_queries;
    }
  }
  r.mean = sum / n;
  if (r.per_query_sizes.size() > 1) {
    double ss = 0;
    for (auto s : r.per_query_sizes) ss += (static_cast<double>(s) - r.mean) * (static_cast<double>(s) - r.mean);
    r.stdev = std::sqrt(ss / (n - 1));
  }
  r.reduction_percent =
      total_signs == 0 ? 0.0 : 100.0 * (1.0 - r.mean / static_cast<double>(total_signs));
  return r;
}

inline SearchSpaceReport search_space_stats(const std::vector<AttributeQuery>& queries,
                                            const KnowledgeGraph& kg) {
  if (queries.empty()) throw Error(ErrorKind::validation, "empty query workload");
  std::vector<std::size_t> sizes;
  sizes.reserve(queries.size());
  for (const auto& q : queries) sizes.push_back(evaluate(q, kg).size());
  return summarize_sizes(std::move(sizes), kg.size());
}

/// Workload file: one query per line; blank lines and `#` comments skipped.
/// Parse errors are rethrown as `name:line: offset N: message`.
inline std::vector<AttributeQuery> parse_workload(std::istream& in, const std::string& name = "workload") {
  std::vector<AttributeQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    try {
      out.push_back(parse_query(body));
    } catch (const PositionedError& e) {
      throw Error(ErrorKind::syntax, name + ":" + std::to_string(line_no) + ": offset " +
                                         std::to_string(e.position()) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace signgraph
