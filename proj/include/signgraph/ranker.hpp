#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "signgraph/encoder.hpp"
#include "signgraph/evaluate.hpp"

namespace signgraph {

struct RankedEntry {
  std::string sign_id;
  double distance = 0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Ascending by distance, ties by ascending sign id.
struct RankedCandidates {
  std::vector<RankedEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }

  /// Zero-based position of `id`, if ranked.
  std::optional<std::size_t> position(const std::string& id) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].sign_id == id) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const RankedCandidates&, const RankedCandidates&) = default;
};

inline double euclidean_distance(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorKind::validation, "embedding size mismatch");
  double sum = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Returns the prototype image for a sign id, or nullptr when there is none.
using PrototypeLookup = std::function<const ImagePatch*(const std::string&)>;

inline PrototypeLookup lookup_in(const std::map<std::string, ImagePatch>& images) {
  return [&images](const std::string& id) -> const ImagePatch* {
    auto it = images.find(id);
    return it == images.end() ? nullptr : &it->second;
  };
}

/// Prototype embeddings for one model, keyed by sign id. Concurrent fills of
/// the same id compute the same value; the first stored one wins.
class EmbeddingCache {
 public:
  template <class Compute>
  Embedding get_or_compute(const std::string& id, Compute&& compute) {
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(id);
      if (it != cache_.end()) return it->second;
    }
    Embedding e = compute();
    std::unique_lock lock(mutex_);
    return cache_.emplace(id, std::move(e)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    cache_.clear();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, Embedding> cache_;
};

/// Orders `candidate_ids` by latent distance between the patch and each
/// candidate's prototype image, keeping the first `k`.
inline RankedCandidates rank(const EncoderModel& model, const ImagePatch& patch,
                             const std::vector<std::string>& candidate_ids,
                             const PrototypeLookup& prototypes, std::size_t k,
                             EmbeddingCache* cache = nullptr) {
  if (k < 1) throw Error(ErrorKind::validation, "k must be at least 1");
  for (const auto& id : candidate_ids) {
    if (!prototypes(id)) throw Error(ErrorKind::not_found, "missing prototype image for " + id);
  }
  const Embedding query = model.encode(patch);

  RankedCandidates out;
  out.entries.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) {
    auto compute = [&] { return model.encode(*prototypes(id)); };
    Embedding proto = cache ? cache->get_or_compute(id, compute) : compute();
    out.entries.push_back({id, euclidean_distance(query, proto)});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.sign_id < b.sign_id;
  });
  out.entries.erase(std::unique(out.entries.begin(), out.entries.end(),
                                [](const auto& a, const auto& b) { return a.sign_id == b.sign_id; }),
                    out.entries.end());
  if (out.entries.size() > k) out.entries.resize(k);
  return out;
}

inline RankedCandidates rank(const EncoderModel& model, const ImagePatch& patch,
                             const CandidateSet& candidates,
                             const std::map<std::string, ImagePatch>& prototypes, std::size_t k,
                             EmbeddingCache* cache = nullptr) {
  return rank(model, patch, candidates.sign_ids, lookup_in(prototypes), k, cache);
}

struct EvalItem {
  ImagePatch patch;
  std::string true_id;
  std::vector<std::string> candidates;
};

struct AccuracyReport {
  std::map<std::size_t, double> accuracy;  // k -> fraction of evaluated items
  std::size_t evaluated = 0;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // item index, reason
};

/// Fraction of items whose true id ranks within the first k, for each k.
/// Items whose candidate list lacks the true id are rejected and reported.
inline AccuracyReport top_k_accuracy(const EncoderModel& model, const std::vector<EvalItem>& items,
                                     const PrototypeLookup& prototypes,
                                     const std::vector<std::size_t>& ks,
                                     EmbeddingCache* cache = nullptr) {
  AccuracyReport report;
  std::map<std::size_t, std::size_t> hits;
  for (auto k : ks) {
    if (k < 1) throw Error(ErrorKind::validation, "k must be at least 1");
    hits[k] = 0;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (std::find(item.candidates.begin(), item.candidates.end(), item.true_id) == item.candidates.end()) {
      report.rejected.emplace_back(i, "true id " + item.true_id + " absent from candidate set");
      continue;
    }
    auto ranked = rank(model, item.patch, item.candidates, prototypes,
                       std::max<std::size_t>(1, item.candidates.size()), cache);
    auto pos = ranked.position(item.true_id);
    ++report.evaluated;
    for (auto& [k, count] : hits) {
      if (pos && *pos < k) ++count;
    }
  }
  for (const auto& [k, count] : hits) {
    report.accuracy[k] =
        report.evaluated == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(report.evaluated);
  }
  return report;
}

}  // namespace signgraph
