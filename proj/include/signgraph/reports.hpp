#pragma once

// Text and line-record renderings of evaluation results. Published reference
// figures are printed next to measured ones for comparison, never asserted.
//
// Search-space table layout (fixed-width columns):
//
//   query  size  text
//   q01       3  plate=diamond AND bg=yellow AND ...
//   ...
//   bucket  queries  percent  reference
//   1-5          19    38.0%        38%
//   ...
//   empty         0     0.0%          -
//   mean       8.92                8.92
//   stdev      7.56                7.36
//   reduction 98.94%              98.9%

#include <cstdio>
#include <string>
#include <vector>

#include "signgraph/evaluate.hpp"
#include "signgraph/ranker_eval.hpp"
#include "signgraph/sign_document.hpp"

namespace signgraph {

enum class ReportFormat { table, records };

inline ReportFormat report_format_from_string(std::string_view s) {
  if (s == "table") return ReportFormat::table;
  if (s == "records") return ReportFormat::records;
  throw Error(ErrorKind::validation, "unknown report format '" + std::string(s) + "'");
}

/// Published search-space distribution over 50 queries and 845 signs.
struct SearchSpaceReference {
  static constexpr std::array<double, SearchSpaceReport::kBuckets> bucket_percent = {38, 16, 20, 12, 14, 0};
  static constexpr double mean = 8.92;
  static constexpr double stdev = 7.36;
  static constexpr double reduction_percent = 98.9;
};

/// Published top-k accuracy by search-space size.
struct RankerReference {
  static constexpr std::array<std::size_t, 3> sizes = {10, 20, 30};
  static constexpr std::array<std::size_t, 3> ks = {1, 3, 5};
  static constexpr std::array<std::array<double, 3>, 3> accuracy = {{
      {0.73, 0.85, 0.90},
      {0.69, 0.80, 0.85},
      {0.60, 0.73, 0.80},
  }};

  static std::optional<double> lookup(std::size_t size, std::size_t k) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      for (std::size_t j = 0; j < ks.size(); ++j) {
        if (sizes[i] == size && ks[j] == k) return accuracy[i][j];
      }
    }
    return std::nullopt;
  }
};

namespace detail {

template <class... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace detail

inline std::string render_search_space(const SearchSpaceReport& r, const std::vector<AttributeQuery>& queries,
                                       ReportFormat format) {
  std::string out;
  const double n = static_cast<double>(r.per_query_sizes.size());
  auto percent = [&](std::size_t count) { return 100.0 * static_cast<double>(count) / n; };

  if (format == ReportFormat::records) {
    for (std::size_t i = 0; i < r.per_query_sizes.size(); ++i) {
      OrderedJson j;
      j["record"] = "query";
      j["index"] = i + 1;
      j["size"] = r.per_query_sizes[i];
      if (i < queries.size()) j["query"] = render_query(queries[i]);
      out += j.dump() + "\n";
    }
    for (std::size_t b = 0; b < SearchSpaceReport::kBuckets; ++b) {
      OrderedJson j;
      j["record"] = "bucket";
      j["bucket"] = SearchSpaceReport::kBucketLabels[b];
      j["queries"] = r.histogram[b];
      j["percent"] = percent(r.histogram[b]);
      j["reference_percent"] = SearchSpaceReference::bucket_percent[b];
      out += j.dump() + "\n";
    }
    OrderedJson s;
    s["record"] = "summary";
    s["queries"] = r.per_query_sizes.size();
    s["total_signs"] = r.total_signs;
    s["empty_queries"] = r.empty_queries;
    s["mean"] = r.mean;
    s["stdev"] = r.stdev;
    s["reduction_percent"] = r.reduction_percent;
    out += s.dump() + "\n";
    OrderedJson ref;
    ref["record"] = "reference";
    ref["mean"] = SearchSpaceReference::mean;
    ref["stdev"] = SearchSpaceReference::stdev;
    ref["reduction_percent"] = SearchSpaceReference::reduction_percent;
    out += ref.dump() + "\n";
    return out;
  }

  out += detail::fmt("Search-space reduction: %zu queries over %zu signs\n\n", r.per_query_sizes.size(),
                     r.total_signs);
  out += "query  size  text\n";
  for (std::size_t i = 0; i < r.per_query_sizes.size(); ++i) {
    out += detail::fmt("q%02zu   %5zu  %s\n", i + 1, r.per_query_sizes[i],
                       i < queries.size() ? render_query(queries[i]).c_str() : "");
  }
  out += "\nbucket  queries  percent  reference\n";
  for (std::size_t b = 0; b < SearchSpaceReport::kBuckets; ++b) {
    out += detail::fmt("%-6s  %7zu  %6.1f%%  %8.0f%%\n", SearchSpaceReport::kBucketLabels[b], r.histogram[b],
                       percent(r.histogram[b]), SearchSpaceReference::bucket_percent[b]);
  }
  out += detail::fmt("%-6s  %7zu  %6.1f%%  %9s\n", "empty", r.empty_queries, percent(r.empty_queries), "-");
  out += detail::fmt("%-9s %6.2f  %16.2f\n", "mean", r.mean, SearchSpaceReference::mean);
  out += detail::fmt("%-9s %6.2f  %16.2f\n", "stdev", r.stdev, SearchSpaceReference::stdev);
  out += detail::fmt("%-9s %6.2f%%  %14.1f%%\n", "reduction", r.reduction_percent,
                     SearchSpaceReference::reduction_percent);
  return out;
}

inline std::string render_accuracy(const AccuracyMatrix& m, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::records) {
    for (auto size : m.sizes) {
      for (auto k : m.ks) {
        OrderedJson j;
        j["record"] = "accuracy";
        j["size"] = size;
        j["k"] = k;
        j["accuracy"] = m.accuracy.at({size, k});
        if (auto ref = RankerReference::lookup(size, k)) j["reference"] = *ref;
        out += j.dump() + "\n";
      }
    }
    OrderedJson s;
    s["record"] = "summary";
    s["items"] = m.items;
    out += s.dump() + "\n";
    return out;
  }

  out += detail::fmt("Top-k accuracy by search-space size: %zu items\n\n", m.items);
  std::string header = "size ";
  for (auto k : m.ks) header += detail::fmt("  top-%-2zu", k);
  header += "  | reference";
  for (auto k : m.ks) header += detail::fmt("  top-%-2zu", k);
  out += header + "\n";
  for (auto size : m.sizes) {
    std::string row = detail::fmt("%-5zu", size);
    for (auto k : m.ks) row += detail::fmt("  %6.3f", m.accuracy.at({size, k}));
    row += "  |          ";
    for (auto k : m.ks) {
      auto ref = RankerReference::lookup(size, k);
      row += ref ? detail::fmt("  %6.2f", *ref) : detail::fmt("  %6s", "-");
    }
    out += row + "\n";
  }
  return out;
}

}  // namespace signgraph
