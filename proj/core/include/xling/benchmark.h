// SPDX-License-Identifier: Apache-2.0
//
// Builds the cross-lingual evaluation set (eligible base prompts x target
// languages, each with a seeded random directive) and the machine-translated
// same-language variant.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/directives.h"
#include "xling/errors.h"
#include "xling/jsonl.h"
#include "xling/templates.h"
#include "xling/translation.h"

namespace xling::bench {

struct BasePrompt {
  int prompt_id = 0;
  std::string text;
  bool excluded = false;
  std::string exclusion_reason;
};

struct Exclusion {
  int prompt_id = 0;
  std::string reason;
};

// JSONL with {prompt_id, text}. Throws ConfigError on duplicate ids.
std::vector<BasePrompt> load_base_prompts(const std::filesystem::path& path);

// JSONL with {prompt_id, reason}.
std::vector<Exclusion> load_exclusions(const std::filesystem::path& path);

struct PromptCounts {
  std::size_t total = 0;
  std::size_t excluded = 0;
  std::size_t eligible = 0;
};

// Flags excluded prompts. An exclusion naming an unknown id is a ConfigError.
PromptCounts apply_exclusions(std::vector<BasePrompt>& prompts, std::span<const Exclusion> exclusions);

enum class Mode { kZeroShot, kReasonThenTranslate, kSameLanguage };
enum class Kind { kCrossLingual, kTranslated };

std::string_view to_string(Mode mode);
std::string_view to_string(Kind kind);
Mode parse_mode(std::string_view name);
Kind parse_kind(std::string_view name);

struct BenchmarkItem {
  std::string item_id;
  int prompt_id = 0;
  std::string base_text;
  std::string rendered_prompt;
  std::string tgt_lang;
  std::string template_id;  // empty for translated items
  Mode mode = Mode::kZeroShot;
  Kind kind = Kind::kCrossLingual;
};

Json to_json(const BenchmarkItem& item);
BenchmarkItem item_from_json(const Json& row);

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path);
void write_benchmark(const std::filesystem::path& path, std::span<const BenchmarkItem> items);

// Base prompts may carry a "{language}" slot; it receives the target
// language's display name.
std::string fill_language_slot(std::string_view text, std::string_view language_name);

// One item per eligible prompt x language, ordered by (prompt_id, lang).
// The template (and, with probability 1/2, its drop-word variant) is drawn
// from a stream keyed by (rng_seed, prompt_id, lang). Throws ConfigError when
// no prompt is eligible or the catalog is empty.
std::vector<BenchmarkItem> build_xl_benchmark(std::span<const BasePrompt> prompts,
                                              std::span<const std::string> langs,
                                              const DirectiveCatalog& catalog,
                                              std::uint64_t rng_seed,
                                              std::string_view joiner = "\n");

struct TranslatedBuild {
  std::vector<BenchmarkItem> items;
  std::vector<std::pair<std::string, ItemError>> errors;  // (item id, error)
};

// Each eligible prompt translated whole, no directive. English is always
// included and passed through untranslated.
TranslatedBuild build_translated_benchmark(std::span<const BasePrompt> prompts,
                                           std::span<const std::string> langs,
                                           translation::Translator& translator,
                                           const gateway::ModelEndpoint& prompt_translator,
                                           std::size_t max_in_flight = 8);

// Two-step rendering of a zero-shot cross-lingual item: answer in English,
// then translate into the target language and output only the translation.
// The template needs {prompt} and {language}. Throws PreconditionError for
// translated items or items already in this mode.
BenchmarkItem render_reason_then_translate(const BenchmarkItem& item, const PromptTemplate& rtt);

}  // namespace xling::bench
