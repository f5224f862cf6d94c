// SPDX-License-Identifier: Apache-2.0
#include "xling/directives.h"

#include <cctype>
#include <set>

#include "xling/errors.h"
#include "xling/jsonl.h"
#include "xling/languages.h"

namespace xling {

std::string DirectiveTemplate::id() const {
  return drop_language_word ? template_id + std::string(kNoLanguageWordSuffix) : template_id;
}

std::string DirectiveTemplate::effective_pattern() const {
  if (!drop_language_word) return pattern;
  std::string out = pattern;
  for (std::string_view word : {" language", " Language"}) {
    for (auto pos = out.find(word); pos != std::string::npos; pos = out.find(word, pos)) {
      const auto end = pos + word.size();
      const bool boundary = end == out.size() || !std::isalpha(static_cast<unsigned char>(out[end]));
      if (boundary) {
        out.erase(pos, word.size());
      } else {
        pos = end;
      }
    }
  }
  return out;
}

std::string DirectiveTemplate::render(std::string_view language_name) const {
  const std::string p = effective_pattern();
  if (languages::count_occurrences(p, kLanguagePlaceholder) != 1) {
    throw ConfigError("directive template '" + id() + "' must contain exactly one {} placeholder");
  }
  std::string out = p;
  out.replace(out.find(kLanguagePlaceholder), kLanguagePlaceholder.size(), language_name);
  return out;
}

DirectiveTemplate DirectiveTemplate::without_language_word() const {
  DirectiveTemplate copy = *this;
  copy.drop_language_word = true;
  return copy;
}

DirectiveCatalog DirectiveCatalog::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("directive catalog not found: " + path.string());
  }
  DirectiveCatalog catalog;
  std::set<std::string> ids;
  try {
    const auto doc = Json::parse(read_text(path));
    catalog.version = doc.at("version").get<std::string>();
    for (const auto& entry : doc.at("templates")) {
      DirectiveTemplate t;
      t.template_id = entry.at("id").get<std::string>();
      t.pattern = entry.at("pattern").get<std::string>();
      if (languages::count_occurrences(t.pattern, kLanguagePlaceholder) != 1) {
        throw ConfigError("directive template '" + t.template_id + "' must contain exactly one {}");
      }
      if (!ids.insert(t.template_id).second) {
        throw ConfigError("duplicate directive template id '" + t.template_id + "'");
      }
      catalog.templates.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw ConfigError("malformed directive catalog " + path.string() + ": " + e.what());
  }
  if (catalog.templates.empty()) throw ConfigError("directive catalog " + path.string() + " is empty");
  return catalog;
}

DirectiveTemplate DirectiveCatalog::find(std::string_view id) const {
  for (const auto& t : templates) {
    if (t.id() == id) return t;
    if (t.without_language_word().id() == id) return t.without_language_word();
  }
  throw ConfigError("unknown directive template '" + std::string(id) + "'");
}

}  // namespace xling
