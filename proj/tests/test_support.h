/// @file test_support.h
/// @brief Shared helpers for the test binaries.

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef ARTQA_TEST_SOURCE_DIR
#error "ARTQA_TEST_SOURCE_DIR must point at the repository root"
#endif

namespace artqa::test {

inline std::filesystem::path source_dir() { return ARTQA_TEST_SOURCE_DIR; }

inline std::filesystem::path fixture_path(const std::string& name) {
  return source_dir() / "fixtures" / name;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("artqa-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace artqa::test
