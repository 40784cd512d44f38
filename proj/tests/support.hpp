#pragma once

// Shared helpers for the unit and acceptance suites.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "signgraph/knowledge_graph.hpp"
#include "signgraph/sign_document.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return fs::path(SIGNGRAPH_FIXTURES_DIR); }

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::vector<signgraph::SignPrototype> read_signs(const fs::path& path) {
  std::ifstream in(path);
  std::vector<signgraph::SignPrototype> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(signgraph::parse_sign_line(line, signgraph::VocabularySet::defaults()));
  }
  return out;
}

inline signgraph::KnowledgeGraph load_graph(const std::vector<fs::path>& files) {
  signgraph::KnowledgeGraph kg;
  for (const auto& f : files) {
    std::ifstream in(f);
    kg.ingest(in);
  }
  return kg;
}

inline signgraph::KnowledgeGraph us_graph() { return load_graph({fixtures_dir() / "us" / "signs.jsonl"}); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("signgraph-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace testsupport
