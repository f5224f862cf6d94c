// SPDX-License-Identifier: Apache-2.0
#include "xling/cache.h"

#include <cctype>

#include "xling/digest.h"
#include "xling/errors.h"

namespace xling {

std::string sanitize_cache_space(std::string_view space) {
  std::string out;
  out.reserve(space.size());
  for (char c : space) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '.' || c == '_' || c == '-' ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

DiskCache::DiskCache(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path DiskCache::entry_path(std::string_view space, std::string_view digest) const {
  return root_ / sanitize_cache_space(space) / (std::string(digest) + ".json");
}

std::mutex& DiskCache::stripe(std::string_view digest) {
  return stripes_[fnv1a64(digest) % stripes_.size()];
}

std::optional<std::string> DiskCache::get(std::string_view space, std::string_view digest) {
  const auto path = entry_path(space, digest);
  std::lock_guard lock(stripe(digest));
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    auto entry = Json::parse(read_text(path));
    if (entry.value("digest", "") != digest || !entry.contains("response") ||
        !entry["response"].is_string()) {
      return std::nullopt;
    }
    return entry["response"].get<std::string>();
  } catch (const std::exception&) {
    // A torn or foreign file is treated as a miss and overwritten later.
    return std::nullopt;
  }
}

void DiskCache::put(std::string_view space, std::string_view digest, const Json& inputs,
                    std::string_view response) {
  Json entry = {{"digest", digest}, {"inputs", inputs}, {"response", response}};
  std::lock_guard lock(stripe(digest));
  write_text_atomic(entry_path(space, digest), dump_compact(entry) + "\n");
}

std::optional<std::string> MemoryCache::get(std::string_view space, std::string_view digest) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(std::string(space) + "/" + std::string(digest));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void MemoryCache::put(std::string_view space, std::string_view digest, const Json&,
                      std::string_view response) {
  std::lock_guard lock(mu_);
  entries_[std::string(space) + "/" + std::string(digest)] = std::string(response);
}

std::size_t MemoryCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace xling
