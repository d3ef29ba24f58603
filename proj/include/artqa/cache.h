/// @file cache.h
/// @brief On-disk generation cache.
///
/// One JSON file per request digest at `<root>/<key[0:2]>/<key[2:]>.json`,
/// holding the result and a checksum over it. Writes go to a temporary file
/// in the same directory and are renamed into place, so concurrent writers
/// never expose partial files (last writer wins).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "artqa/textgen.h"

namespace artqa::textgen {

struct CacheStats {
  std::uint64_t entries = 0;
  std::uint64_t bytes = 0;
};

class GenerationCache {
 public:
  explicit GenerationCache(std::filesystem::path root);

  /// ARTQA_CACHE_DIR, else ".artqa-cache".
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path path_for(const std::string& key) const;

  /// The stored result with cached = true. Missing, unreadable, or
  /// checksum-mismatched entries yield nullopt (corruption is logged).
  std::optional<GenerationResult> load(const std::string& key) const;

  /// Throws IoError.
  void store(const std::string& key, const GenerationResult& result) const;

  CacheStats stats() const;

  /// Removes every entry; returns how many were removed.
  std::uint64_t clear() const;

 private:
  std::filesystem::path root_;
};

/// Returns a cached result without touching the backend, or generates,
/// persists, and returns a fresh (cached = false) result.
GenerationResult cached_generate(const GenerationCache& cache, GenerationBackend& backend,
                                 const GenerationRequest& request);

}  // namespace artqa::textgen
