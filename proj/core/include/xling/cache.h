// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "xling/jsonl.h"

namespace xling {

// Content-addressed response store. `space` partitions entries (a model id or
// QE scorer id); `digest` is the hex content hash of the request.
class CacheStore {
 public:
  virtual ~CacheStore() = default;
  virtual std::optional<std::string> get(std::string_view space, std::string_view digest) = 0;
  virtual void put(std::string_view space, std::string_view digest, const Json& inputs,
                   std::string_view response) = 0;
};

// Layout: <root>/<space>/<digest>.json holding {digest, inputs, response}.
// Characters outside [A-Za-z0-9._-] in `space` are replaced with '_' so model
// ids such as "org/model" stay one directory level deep.
class DiskCache final : public CacheStore {
 public:
  explicit DiskCache(std::filesystem::path root);

  std::optional<std::string> get(std::string_view space, std::string_view digest) override;
  void put(std::string_view space, std::string_view digest, const Json& inputs,
           std::string_view response) override;

  std::filesystem::path entry_path(std::string_view space, std::string_view digest) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::mutex& stripe(std::string_view digest);

  std::filesystem::path root_;
  std::array<std::mutex, 64> stripes_;
};

class MemoryCache final : public CacheStore {
 public:
  std::optional<std::string> get(std::string_view space, std::string_view digest) override;
  void put(std::string_view space, std::string_view digest, const Json& inputs,
           std::string_view response) override;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> entries_;
};

// Never stores anything.
class NullCache final : public CacheStore {
 public:
  std::optional<std::string> get(std::string_view, std::string_view) override { return std::nullopt; }
  void put(std::string_view, std::string_view, const Json&, std::string_view) override {}
};

std::string sanitize_cache_space(std::string_view space);

}  // namespace xling
