// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace xling::languages {

struct Language {
  std::string_view code;  // ISO 639-3
  std::string_view name;  // English display name used in directives
};

std::span<const Language> all();

std::optional<std::string_view> display_name(std::string_view code);

// Throws ConfigError for unknown codes.
std::string_view require_display_name(std::string_view code);

// The eight evaluation languages of the cross-lingual benchmark.
inline constexpr std::array<std::string_view, 8> kBenchmarkLanguages = {
    "deu", "por", "hun", "lit", "gle", "mlt", "zho", "hin"};

// Non-overlapping occurrences of `needle` in `text`.
std::size_t count_occurrences(std::string_view text, std::string_view needle);

}  // namespace xling::languages
