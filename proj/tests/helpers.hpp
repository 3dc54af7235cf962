#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "transferscope/ledger.hpp"

namespace testing {

namespace fs = std::filesystem;

inline transferscope::LanguageRegistry registry(const std::vector<std::string>& isos,
                                                const std::vector<std::string>& unseen = {}) {
  std::vector<transferscope::LanguageInfo> entries;
  for (const auto& iso : isos) {
    const bool seen = std::find(unseen.begin(), unseen.end(), iso) == unseen.end();
    entries.push_back({iso, "Fam", "Gen", "Latn", seen});
  }
  return transferscope::LanguageRegistry(std::move(entries));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("transferscope-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
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

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline fs::path fixture_dir() { return fs::path(TRANSFERSCOPE_FIXTURE_DIR); }

}  // namespace testing
