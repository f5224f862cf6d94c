// SPDX-License-Identifier: Apache-2.0
//
// Tolerant parser for labeled completions such as
//   "QUESTION: ...\nRESPONSE: ..."
// Labels match case-insensitively at a word boundary and must be followed by
// ':'. A label's content runs to the next label of the set (or the end) and
// is trimmed. The first occurrence of each label wins.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace xling::envelope {

// Label (as given) -> non-empty content. Labels with empty content are absent.
std::map<std::string, std::string> parse(std::string_view text,
                                         std::span<const std::string_view> labels);

std::optional<std::string> extract(std::string_view text, std::string_view label);

// Integer following "SCORE:". Returns nullopt when the label is missing or is
// not followed by an integer; range checks are the caller's business.
std::optional<int> parse_score(std::string_view text);

}  // namespace xling::envelope
