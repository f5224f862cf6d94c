// SPDX-License-Identifier: Apache-2.0
#include "xling/languages.h"

#include <string>

#include "xling/errors.h"

namespace xling::languages {
namespace {

constexpr std::array<Language, 12> kLanguages = {{
    {"eng", "English"},
    {"deu", "German"},
    {"por", "Portuguese"},
    {"hun", "Hungarian"},
    {"lit", "Lithuanian"},
    {"gle", "Irish"},
    {"mlt", "Maltese"},
    {"zho", "Chinese"},
    {"hin", "Hindi"},
    {"fra", "French"},
    {"fin", "Finnish"},
    {"tur", "Turkish"},
}};

}  // namespace

std::span<const Language> all() { return kLanguages; }

std::optional<std::string_view> display_name(std::string_view code) {
  for (const auto& lang : kLanguages) {
    if (lang.code == code) return lang.name;
  }
  return std::nullopt;
}

std::string_view require_display_name(std::string_view code) {
  if (auto name = display_name(code)) return *name;
  throw ConfigError("no display name for language code '" + std::string(code) + "'");
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace xling::languages
