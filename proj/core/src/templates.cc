// SPDX-License-Identifier: Apache-2.0
#include "xling/templates.h"

#include <cstdlib>

#include "xling/errors.h"
#include "xling/jsonl.h"

#ifndef XLING_SOURCE_DATA_DIR
#define XLING_SOURCE_DATA_DIR ""
#endif
#ifndef XLING_DEFAULT_DATA_DIR
#define XLING_DEFAULT_DATA_DIR ""
#endif

namespace xling {

bool PromptTemplate::has_placeholder(std::string_view key) const {
  return text.find("{" + std::string(key) + "}") != std::string::npos;
}

void PromptTemplate::require(std::initializer_list<std::string_view> keys) const {
  for (auto key : keys) {
    if (!has_placeholder(key)) {
      throw ConfigError("template " + id() + " lacks placeholder {" + std::string(key) + "}");
    }
  }
}

PromptTemplate load_template(const std::filesystem::path& dir, std::string_view name,
                             std::string_view version) {
  const auto path = dir / (std::string(name) + "." + std::string(version) + ".txt");
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("prompt template not found: " + path.string());
  }
  std::string text = read_text(path);
  if (text.ends_with('\n')) text.pop_back();  // the file's final newline is not part of the prompt
  return {std::string(name), std::string(version), std::move(text)};
}

std::string render(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open + 1);
    if (close == std::string_view::npos) break;
    out.append(text, pos, open - pos);
    const auto key = std::string(text.substr(open + 1, close - open - 1));
    if (auto it = vars.find(key); it != vars.end()) {
      out += it->second;
      pos = close + 1;
    } else {
      out += '{';
      pos = open + 1;
    }
  }
  out.append(text.substr(pos));
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("XLING_DATA_DIR"); env && *env) return env;
  for (const char* candidate : {XLING_SOURCE_DATA_DIR, XLING_DEFAULT_DATA_DIR}) {
    std::filesystem::path dir(candidate);
    if (!dir.empty() && std::filesystem::is_directory(dir / "prompts")) return dir;
  }
  return "data";
}

}  // namespace xling
