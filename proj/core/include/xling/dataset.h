// SPDX-License-Identifier: Apache-2.0
//
// Stage 4 and export: keep the best-scored fraction of translated responses,
// wrap each into a cross-lingual example and write an SFT-ready JSONL file
// with a manifest alongside.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xling/directives.h"
#include "xling/jsonl.h"
#include "xling/synthesis.h"
#include "xling/translation.h"

namespace xling::dataset {

enum class FilterScope { kGlobal, kPerLanguage };
enum class FilterSelection { kTopQe, kRandom };

std::string_view to_string(FilterScope scope);
std::string_view to_string(FilterSelection selection);
FilterScope parse_filter_scope(std::string_view name);
FilterSelection parse_filter_selection(std::string_view name);

struct FilterConfig {
  double keep_fraction = 0.8;
  FilterScope scope = FilterScope::kPerLanguage;
  FilterSelection selection = FilterSelection::kTopQe;
  std::uint64_t rng_seed = 0;  // used by kRandom

  // Throws ConfigError unless keep_fraction is in (0, 1].
  void validate() const;
};

struct ScoredItem {
  std::string id;
  std::string tgt_lang;
  double passage_qe = 0.0;
};

// ceil(keep_fraction * n), with products within 1e-9 of an integer treated as
// that integer so 0.7 * 10 keeps 7, not 8.
std::size_t kept_count(std::size_t n, double keep_fraction);

// Indices of kept items in ascending input order. kTopQe ranks by passage_qe
// descending, ties by id ascending, and keeps the first kept_count(N) of
// each bucket (one bucket, or one per tgt_lang).
std::vector<std::size_t> filter_top(std::span<const ScoredItem> items, const FilterConfig& cfg);

inline constexpr std::string_view kDirectiveJoiner = "\n";

struct CrossLingualExample {
  std::string id;
  std::string instruction_xl;
  std::string response_xl;
  std::string src_lang;
  std::string tgt_lang;
  double passage_qe = 0.0;
  std::string strategy;
  std::string template_id;
};

Json to_json(const CrossLingualExample& example);
CrossLingualExample example_from_json(const Json& row);

// Throws PreconditionError when an invariant is broken: equal languages, a
// directive that does not name the target language exactly once, an empty
// response, or passage_qe outside [0, 1].
void validate(const CrossLingualExample& example);

// id is "<pair id>#<tgt_lang>". Throws PreconditionError unless the pair is
// refined and ConfigError when the template has no placeholder.
CrossLingualExample wrap_cross_lingual(const synthesis::QAPair& pair,
                                       const translation::TranslatedResponse& translated,
                                       std::string_view tgt_lang,
                                       const DirectiveTemplate& directive,
                                       std::string_view joiner = kDirectiveJoiner,
                                       std::string_view src_lang = "eng",
                                       std::string_view strategy = "");

struct DatasetManifest {
  std::size_t inputs = 0;
  std::size_t kept = 0;
  std::size_t filtered = 0;
  std::size_t item_errors = 0;
  std::map<std::string, std::size_t> counts_by_language;  // exported records
  std::map<std::string, std::map<std::string, std::size_t>> stage_counts;
  std::map<std::string, std::size_t> drop_counts;  // error class -> count
  std::string strategy;
  std::string scorer_id;
  std::string template_catalog_version;
  std::string template_id;
  std::string content_digest;  // SHA-256 of the exported file
  std::size_t records = 0;

  bool reconciles() const { return inputs == kept + filtered + item_errors; }
  Json to_json() const;
  static DatasetManifest from_json(const Json& doc);
};

// "<dir>/<stem>.manifest.json" next to the export.
std::filesystem::path manifest_path_for(const std::filesystem::path& export_path);

// Writes {id, instruction, response, src_lang, tgt_lang, passage_qe,
// template_id} lines in input order, then the manifest. `provenance` carries
// the upstream counts; kept, records, per-language counts and the digest are
// filled in here. Throws IoError or PreconditionError.
DatasetManifest export_sft(std::span<const CrossLingualExample> examples,
                           const std::filesystem::path& path, DatasetManifest provenance = {});

}  // namespace xling::dataset
