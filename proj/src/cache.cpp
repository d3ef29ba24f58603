#include "artqa/cache.h"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "artqa/digest.h"
#include "artqa/errors.h"

namespace artqa::textgen {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json result_to_json(const GenerationResult& result) {
  return {{"text", result.text},
          {"prompt_tokens", result.prompt_tokens},
          {"completion_tokens", result.completion_tokens},
          {"backend_id", result.backend_id},
          {"timestamp", result.timestamp}};
}

GenerationResult result_from_json(const json& j) {
  GenerationResult result;
  result.text = j.at("text").get<std::string>();
  result.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  result.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  result.backend_id = j.at("backend_id").get<std::string>();
  result.timestamp = j.at("timestamp").get<std::string>();
  return result;
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream out;
  out << ".tmp." << ::getpid() << '.' << std::this_thread::get_id() << '.'
      << counter.fetch_add(1);
  return out.str();
}

bool is_entry(const fs::directory_entry& entry) {
  return entry.is_regular_file() && entry.path().extension() == ".json";
}

}  // namespace

GenerationCache::GenerationCache(fs::path root) : root_(std::move(root)) {}

fs::path GenerationCache::default_root() {
  if (const char* dir = std::getenv("ARTQA_CACHE_DIR"); dir && *dir) return dir;
  return ".artqa-cache";
}

fs::path GenerationCache::path_for(const std::string& key) const {
  if (key.size() < 3) throw PreconditionError("cache key too short: " + key);
  return root_ / key.substr(0, 2) / (key.substr(2) + ".json");
}

std::optional<GenerationResult> GenerationCache::load(const std::string& key) const {
  const fs::path path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    const json entry = json::parse(buffer.str());
    const json& result = entry.at("result");
    if (entry.at("key").get<std::string>() != key ||
        entry.at("checksum").get<std::string>() != sha256_hex(result.dump())) {
      throw CacheCorrupt("checksum mismatch");
    }
    GenerationResult out = result_from_json(result);
    out.cached = true;
    return out;
  } catch (const std::exception& e) {
    spdlog::warn("CacheCorrupt: ignoring cache entry {} ({})", path.string(), e.what());
    return std::nullopt;
  }
}

void GenerationCache::store(const std::string& key, const GenerationResult& result) const {
  const fs::path path = path_for(key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());

  const json payload = result_to_json(result);
  const json entry = {{"key", key},
                      {"result", payload},
                      {"checksum", sha256_hex(payload.dump())}};
  const fs::path temp = path.string() + temp_suffix();
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << entry.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + temp.string());
  }
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw IoError("cannot move cache entry into place at " + path.string());
  }
}

CacheStats GenerationCache::stats() const {
  CacheStats stats;
  std::error_code ec;
  if (!fs::exists(root_, ec)) return stats;
  for (const auto& entry : fs::recursive_directory_iterator(root_, ec)) {
    if (!is_entry(entry)) continue;
    ++stats.entries;
    stats.bytes += entry.file_size();
  }
  return stats;
}

std::uint64_t GenerationCache::clear() const {
  std::error_code ec;
  if (!fs::exists(root_, ec)) return 0;
  std::vector<fs::path> doomed;
  for (const auto& entry : fs::recursive_directory_iterator(root_, ec)) {
    if (is_entry(entry)) doomed.push_back(entry.path());
  }
  for (const auto& path : doomed) fs::remove(path, ec);
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    if (entry.is_directory() && fs::is_empty(entry.path())) fs::remove(entry.path(), ec);
  }
  return doomed.size();
}

GenerationResult cached_generate(const GenerationCache& cache, GenerationBackend& backend,
                                 const GenerationRequest& request) {
  request.validate();
  const std::string key = cache_key(request);
  if (auto hit = cache.load(key)) return *std::move(hit);
  GenerationResult result = generate(backend, request);
  cache.store(key, result);
  return result;
}

}  // namespace artqa::textgen
