#pragma once

// Top-k accuracy over candidate pools of several sizes.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "signgraph/detail/rng.hpp"
#include "signgraph/ranker.hpp"
#include "signgraph/sign_document.hpp"

namespace signgraph {

/// One evaluation item: a patch file, its true sign and a candidate pool.
struct ManifestEntry {
  std::filesystem::path patch;
  std::string sign_id;
  std::vector<std::string> pool;
};

/// Manifest: JSON Lines of {"patch": path, "sign_id": id, "pool": [ids]}.
/// Relative patch paths are resolved against `base`.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base,
                                                 const std::string& name = "manifest") {
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto where = name + ":" + std::to_string(line_no) + ": ";
    try {
      auto j = Json::parse(line);
      ManifestEntry e;
      std::filesystem::path p = j.at("patch").get<std::string>();
      e.patch = p.is_absolute() ? p : base / p;
      e.sign_id = j.at("sign_id").get<std::string>();
      e.pool = j.at("pool").get<std::vector<std::string>>();
      if (std::find(e.pool.begin(), e.pool.end(), e.sign_id) == e.pool.end()) {
        throw Error(ErrorKind::validation, "true id " + e.sign_id + " absent from pool");
      }
      out.push_back(std::move(e));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::format, where + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return out;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read manifest " + path.string());
  return parse_manifest(in, path.parent_path(), path.string());
}

/// Exactly `size` distinct ids from `pool`, always including `true_id`; the
/// others are a seeded uniform draw. Result is sorted.
inline std::vector<std::string> downsample_pool(const std::vector<std::string>& pool, const std::string& true_id,
                                                std::size_t size, std::uint64_t seed) {
  std::vector<std::string> others;
  bool has_true = false;
  std::set<std::string> seen;
  for (const auto& id : pool) {
    if (!seen.insert(id).second) continue;
    if (id == true_id) {
      has_true = true;
    } else {
      others.push_back(id);
    }
  }
  if (!has_true) throw Error(ErrorKind::validation, "true id " + true_id + " absent from pool");
  if (size < 1) throw Error(ErrorKind::validation, "pool size must be at least 1");
  if (others.size() + 1 < size) {
    throw Error(ErrorKind::validation, "pool for " + true_id + " has " + std::to_string(others.size() + 1) +
                                           " ids, fewer than the requested " + std::to_string(size));
  }
  std::sort(others.begin(), others.end());
  detail::SplitMix64 rng(seed);
  rng.shuffle(others);
  others.resize(size - 1);
  others.push_back(true_id);
  std::sort(others.begin(), others.end());
  return others;
}

struct AccuracyMatrix {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> ks;
  std::map<std::pair<std::size_t, std::size_t>, double> accuracy;  // (size, k)
  std::size_t items = 0;
};

/// Accuracy for every (size, k). Each item's pool is down-sampled per size
/// with a seed derived from `seed`, the item index and the size.
inline AccuracyMatrix evaluate_ranker(const EncoderModel& model, const std::vector<ManifestEntry>& manifest,
                                      const PrototypeLookup& prototypes, const std::vector<std::size_t>& sizes,
                                      const std::vector<std::size_t>& ks, std::uint64_t seed,
                                      EmbeddingCache* cache = nullptr) {
  AccuracyMatrix m;
  m.sizes = sizes;
  m.ks = ks;
  m.items = manifest.size();
  std::vector<ImagePatch> patches;
  patches.reserve(manifest.size());
  for (const auto& e : manifest) patches.push_back(load_image(e.patch));
  for (auto size : sizes) {
    std::vector<EvalItem> items;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const auto draw_seed = seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)) ^ (static_cast<std::uint64_t>(size) << 40);
      items.push_back({patches[i], manifest[i].sign_id,
                       downsample_pool(manifest[i].pool, manifest[i].sign_id, size, draw_seed)});
    }
    auto report = top_k_accuracy(model, items, prototypes, ks, cache);
    for (auto k : ks) m.accuracy[{size, k}] = report.accuracy.at(k);
  }
  return m;
}

}  // namespace signgraph
