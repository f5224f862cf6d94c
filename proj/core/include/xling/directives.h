// SPDX-License-Identifier: Apache-2.0
//
// Language directives appended to an instruction ("Respond in {} language").
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace xling {

inline constexpr std::string_view kLanguagePlaceholder = "{}";
inline constexpr std::string_view kNoLanguageWordSuffix = "-nolang";

struct DirectiveTemplate {
  std::string template_id;
  std::string pattern;  // exactly one "{}"
  bool drop_language_word = false;

  // template_id, suffixed with "-nolang" for the drop-word variant.
  std::string id() const;

  // The pattern with " language" removed when drop_language_word is set.
  std::string effective_pattern() const;

  // Throws ConfigError unless the pattern holds exactly one placeholder.
  std::string render(std::string_view language_name) const;

  DirectiveTemplate without_language_word() const;
};

struct DirectiveCatalog {
  std::string version;
  std::vector<DirectiveTemplate> templates;

  // JSON document {"version": ..., "templates": [{"id": ..., "pattern": ...}]}.
  // Throws ConfigError on duplicates or patterns without one placeholder.
  static DirectiveCatalog load(const std::filesystem::path& path);

  // Resolves plain ids and their "-nolang" variants. Throws ConfigError.
  DirectiveTemplate find(std::string_view id) const;
};

}  // namespace xling
