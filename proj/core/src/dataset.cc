// SPDX-License-Identifier: Apache-2.0
#include "xling/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xling/digest.h"
#include "xling/languages.h"
#include "xling/rng.h"
#include "xling/unicode.h"

namespace xling::dataset {

std::string_view to_string(FilterScope scope) {
  return scope == FilterScope::kGlobal ? "global" : "per_language";
}

std::string_view to_string(FilterSelection selection) {
  return selection == FilterSelection::kTopQe ? "top_qe" : "random";
}

FilterScope parse_filter_scope(std::string_view name) {
  if (name == "global") return FilterScope::kGlobal;
  if (name == "per_language") return FilterScope::kPerLanguage;
  throw ConfigError("unknown filter scope '" + std::string(name) + "'");
}

FilterSelection parse_filter_selection(std::string_view name) {
  if (name == "top_qe") return FilterSelection::kTopQe;
  if (name == "random") return FilterSelection::kRandom;
  throw ConfigError("unknown filter selection '" + std::string(name) + "'");
}

void FilterConfig::validate() const {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ConfigError("keep_fraction must be in (0, 1]");
  }
}

std::size_t kept_count(std::size_t n, double keep_fraction) {
  const double x = keep_fraction * static_cast<double>(n);
  const double nearest = std::round(x);
  const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::min(n, static_cast<std::size_t>(k));
}

std::vector<std::size_t> filter_top(std::span<const ScoredItem> items, const FilterConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < items.size(); ++i) {
    buckets[cfg.scope == FilterScope::kGlobal ? std::string() : items[i].tgt_lang].push_back(i);
  }

  std::vector<std::size_t> kept;
  kept.reserve(kept_count(items.size(), cfg.keep_fraction) + buckets.size());
  for (auto& [lang, members] : buckets) {
    const std::size_t keep = kept_count(members.size(), cfg.keep_fraction);
    if (cfg.selection == FilterSelection::kTopQe) {
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        if (items[a].passage_qe != items[b].passage_qe) return items[a].passage_qe > items[b].passage_qe;
        if (items[a].id != items[b].id) return items[a].id < items[b].id;
        return a < b;
      });
    } else {
      // Partial Fisher-Yates over the bucket, seeded per bucket.
      Rng rng(derive_seed(cfg.rng_seed, lang));
      for (std::size_t i = 0; i < keep; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
        std::swap(members[i], members[j]);
      }
    }
    kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

Json to_json(const CrossLingualExample& e) {
  return {{"id", e.id},
          {"instruction_xl", e.instruction_xl},
          {"response_xl", e.response_xl},
          {"src_lang", e.src_lang},
          {"tgt_lang", e.tgt_lang},
          {"passage_qe", e.passage_qe},
          {"strategy", e.strategy},
          {"template_id", e.template_id}};
}

CrossLingualExample example_from_json(const Json& row) {
  try {
    CrossLingualExample e;
    e.id = row.at("id").get<std::string>();
    e.instruction_xl = row.at("instruction_xl").get<std::string>();
    e.response_xl = row.at("response_xl").get<std::string>();
    e.src_lang = row.at("src_lang").get<std::string>();
    e.tgt_lang = row.at("tgt_lang").get<std::string>();
    e.passage_qe = row.at("passage_qe").get<double>();
    e.strategy = row.value("strategy", "");
    e.template_id = row.value("template_id", "");
    return e;
  } catch (const Json::exception& ex) {
    throw IoError(std::string("malformed cross-lingual example: ") + ex.what());
  }
}

void validate(const CrossLingualExample& e) {
  if (e.tgt_lang == e.src_lang) throw PreconditionError(e.id + ": target language equals source");
  const auto name = languages::require_display_name(e.tgt_lang);
  const auto last_line = std::string_view(e.instruction_xl).substr(
      e.instruction_xl.rfind('\n') == std::string::npos ? 0 : e.instruction_xl.rfind('\n') + 1);
  if (languages::count_occurrences(last_line, name) != 1) {
    throw PreconditionError(e.id + ": directive must name " + std::string(name) + " exactly once");
  }
  if (unicode::trim(e.response_xl).empty()) throw PreconditionError(e.id + ": empty response");
  if (!(e.passage_qe >= 0.0 && e.passage_qe <= 1.0)) {
    throw PreconditionError(e.id + ": passage_qe outside [0, 1]");
  }
}

CrossLingualExample wrap_cross_lingual(const synthesis::QAPair& pair,
                                       const translation::TranslatedResponse& translated,
                                       std::string_view tgt_lang, const DirectiveTemplate& directive,
                                       std::string_view joiner, std::string_view src_lang,
                                       std::string_view strategy) {
  if (pair.stage != synthesis::Stage::kRefined) {
    throw PreconditionError("pair " + pair.id + " must be refined before wrapping");
  }
  const auto name = languages::require_display_name(tgt_lang);
  CrossLingualExample e;
  e.id = pair.id + "#" + std::string(tgt_lang);
  e.instruction_xl = pair.instruction + std::string(joiner) + directive.render(name);
  e.response_xl = translated.text;
  e.src_lang = std::string(src_lang);
  e.tgt_lang = std::string(tgt_lang);
  e.passage_qe = translated.passage_qe;
  e.strategy = std::string(strategy);
  e.template_id = directive.id();
  return e;
}

Json DatasetManifest::to_json() const {
  return {{"inputs", inputs},
          {"kept", kept},
          {"filtered", filtered},
          {"item_errors", item_errors},
          {"reconciles", reconciles()},
          {"counts_by_language", counts_by_language},
          {"stage_counts", stage_counts},
          {"drop_counts", drop_counts},
          {"strategy", strategy},
          {"scorer_id", scorer_id},
          {"template_catalog_version", template_catalog_version},
          {"template_id", template_id},
          {"content_digest", content_digest},
          {"records", records}};
}

DatasetManifest DatasetManifest::from_json(const Json& doc) {
  DatasetManifest m;
  m.inputs = doc.value("inputs", std::size_t{0});
  m.kept = doc.value("kept", std::size_t{0});
  m.filtered = doc.value("filtered", std::size_t{0});
  m.item_errors = doc.value("item_errors", std::size_t{0});
  m.counts_by_language = doc.value("counts_by_language", m.counts_by_language);
  m.stage_counts = doc.value("stage_counts", m.stage_counts);
  m.drop_counts = doc.value("drop_counts", m.drop_counts);
  m.strategy = doc.value("strategy", "");
  m.scorer_id = doc.value("scorer_id", "");
  m.template_catalog_version = doc.value("template_catalog_version", "");
  m.template_id = doc.value("template_id", "");
  m.content_digest = doc.value("content_digest", "");
  m.records = doc.value("records", std::size_t{0});
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& export_path) {
  return export_path.parent_path() / (export_path.stem().string() + ".manifest.json");
}

DatasetManifest export_sft(std::span<const CrossLingualExample> examples,
                           const std::filesystem::path& path, DatasetManifest provenance) {
  std::string contents;
  DatasetManifest manifest = std::move(provenance);
  manifest.counts_by_language.clear();
  for (const auto& e : examples) {
    validate(e);
    const Json row = {{"id", e.id},
                      {"instruction", e.instruction_xl},
                      {"response", e.response_xl},
                      {"src_lang", e.src_lang},
                      {"tgt_lang", e.tgt_lang},
                      {"passage_qe", e.passage_qe},
                      {"template_id", e.template_id}};
    contents += dump_compact(row);
    contents += '\n';
    ++manifest.counts_by_language[e.tgt_lang];
  }
  write_text_atomic(path, contents);

  manifest.records = examples.size();
  manifest.kept = examples.size();
  if (manifest.inputs == 0) manifest.inputs = manifest.kept + manifest.filtered + manifest.item_errors;
  manifest.content_digest = sha256_hex(contents);
  write_text_atomic(manifest_path_for(path), manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace xling::dataset
