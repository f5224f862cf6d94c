// SPDX-License-Identifier: Apache-2.0
#include "xling/envelope.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "xling/unicode.h"

namespace xling::envelope {
namespace {

struct Hit {
  std::size_t label_start;
  std::size_t content_start;
};

bool iequal(char a, char b) {
  return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

// All occurrences of `label` followed by optional spaces/asterisks and ':'.
std::vector<Hit> find_all(std::string_view text, std::string_view label) {
  std::vector<Hit> hits;
  if (label.empty() || text.size() < label.size()) return hits;
  for (std::size_t i = 0; i + label.size() <= text.size(); ++i) {
    if (i > 0 && is_word_char(text[i - 1])) continue;
    if (!std::equal(label.begin(), label.end(), text.begin() + static_cast<std::ptrdiff_t>(i), iequal)) {
      continue;
    }
    std::size_t j = i + label.size();
    while (j < text.size() && (text[j] == '*' || text[j] == ' ')) ++j;
    if (j < text.size() && text[j] == ':') {
      ++j;
      // Markdown bold around the label ("**QUESTION:**") is common.
      while (j < text.size() && text[j] == '*') ++j;
      hits.push_back({i, j});
    }
  }
  return hits;
}

}  // namespace

std::map<std::string, std::string> parse(std::string_view text,
                                         std::span<const std::string_view> labels) {
  std::vector<std::vector<Hit>> hits;
  std::vector<std::size_t> boundaries;
  for (auto label : labels) {
    hits.push_back(find_all(text, label));
    for (const auto& h : hits.back()) boundaries.push_back(h.label_start);
  }
  std::sort(boundaries.begin(), boundaries.end());

  std::map<std::string, std::string> out;
  for (std::size_t l = 0; l < labels.size(); ++l) {
    if (hits[l].empty()) continue;
    const Hit first = hits[l].front();
    auto end_it = std::lower_bound(boundaries.begin(), boundaries.end(), first.content_start);
    const std::size_t end = end_it == boundaries.end() ? text.size() : *end_it;
    auto content = unicode::trim(text.substr(first.content_start, end - first.content_start));
    if (!content.empty()) out.emplace(std::string(labels[l]), std::string(content));
  }
  return out;
}

std::optional<std::string> extract(std::string_view text, std::string_view label) {
  const std::string_view labels[] = {label};
  auto parsed = parse(text, labels);
  if (auto it = parsed.find(std::string(label)); it != parsed.end()) return it->second;
  return std::nullopt;
}

std::optional<int> parse_score(std::string_view text) {
  auto hits = find_all(text, "SCORE");
  if (hits.empty()) return std::nullopt;
  std::size_t i = hits.front().content_start;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '*')) ++i;
  int value = 0;
  const char* begin = text.data() + i;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) return std::nullopt;
  // "3.5" is not an integer score.
  if (ptr != end && *ptr == '.' && ptr + 1 != end && std::isdigit(static_cast<unsigned char>(ptr[1]))) {
    return std::nullopt;
  }
  return value;
}

}  // namespace xling::envelope
