// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace xling {

using Json = nlohmann::json;

// Compact serialization used for every artifact: sorted keys, no spaces,
// UTF-8 passed through unescaped.
std::string dump_compact(const Json& value);

std::string read_text(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, std::string_view contents);

// Reads every line as a JSON value. Blank lines are ignored; a malformed line
// throws IoError naming the file and line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

// Append-only record writer.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path);
  void append(const Json& row);
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace xling
