// SPDX-License-Identifier: Apache-2.0
//
// Prompt texts live in versioned files (<name>.<version>.txt) so released
// prompts can be dropped in without a rebuild.
#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>

namespace xling {

struct PromptTemplate {
  std::string name;
  std::string version;
  std::string text;

  std::string id() const { return name + "." + version; }
  bool has_placeholder(std::string_view key) const;
  // Throws ConfigError naming the first missing `{key}`.
  void require(std::initializer_list<std::string_view> keys) const;
};

// Loads <dir>/<name>.<version>.txt without its final newline. Throws
// ConfigError when missing.
PromptTemplate load_template(const std::filesystem::path& dir, std::string_view name,
                             std::string_view version = "v1");

// Single-pass substitution of `{key}` for each key in `vars`. Substituted
// values are never rescanned, and unknown `{...}` sequences are left as is.
std::string render(std::string_view text, const std::map<std::string, std::string>& vars);

// Location of the bundled data directory (prompts/, benchmark/). Resolution
// order: XLING_DATA_DIR env var, the source tree (for in-tree builds), then
// the install prefix.
std::filesystem::path default_data_dir();

}  // namespace xling
