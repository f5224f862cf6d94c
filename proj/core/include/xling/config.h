// SPDX-License-Identifier: Apache-2.0
//
// Pipeline configuration: one JSON document naming endpoints per role,
// corpus sampling, languages, strategy, filtering, template locations, the
// cache root, seeds and output roots. Relative input paths resolve against
// the config file's directory; cache, output and run roots against the
// working directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xling/corpus.h"
#include "xling/dataset.h"
#include "xling/gateway.h"
#include "xling/jsonl.h"

namespace xling {

struct QeEndpoint {
  std::string scorer_id;
  std::string url;
  std::size_t max_batch = 64;
};

enum class LanguageAssignment { kAll, kRoundRobin };

struct Seeds {
  std::uint64_t base = 0;
  std::uint64_t sampling = 0;
  std::uint64_t strategy = 0;
  std::uint64_t filter = 0;
  std::uint64_t benchmark = 0;
  std::uint64_t judge = 0;
  std::uint64_t jitter = 0;

  // Derives every unset seed from `base`.
  static Seeds from_base(std::uint64_t base);
};

struct PipelineConfig {
  std::filesystem::path source;  // config file, empty when built in memory
  Json raw;                       // parsed document, for the config digest

  std::optional<gateway::ModelEndpoint> teacher;
  std::vector<gateway::ModelEndpoint> translators;
  std::optional<gateway::ModelEndpoint> prompt_translator;
  std::optional<gateway::ModelEndpoint> judge;
  std::vector<gateway::ModelEndpoint> models;  // candidates and references, selected by id
  std::optional<QeEndpoint> qe;
  std::optional<std::string> segmenter_url;

  gateway::GenerationParams teacher_params;
  gateway::GenerationParams translator_params{0.0, 2048, {}};
  gateway::GenerationParams judge_params{0.0, 1024, {}};
  gateway::GenerationParams candidate_params;
  gateway::RetryPolicy retry;
  std::size_t max_in_flight = 8;

  std::filesystem::path corpus_path;
  corpus::SeedFormat corpus_format = corpus::SeedFormat::kPlainLines;
  std::string corpus_source;  // label; defaults to the file stem
  corpus::SamplingConfig sampling;

  std::vector<std::string> languages;
  LanguageAssignment assignment = LanguageAssignment::kAll;
  std::string strategy = "best_of_k";  // naive | best_of_k | random
  dataset::FilterConfig filter;

  std::filesystem::path templates_dir;
  std::filesystem::path directive_catalog;
  std::string directive_template = "respond";
  bool drop_language_word = true;

  std::filesystem::path base_prompts;
  std::filesystem::path exclusions;
  std::vector<std::string> benchmark_languages;

  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  std::filesystem::path runs_dir;
  Seeds seeds;

  // Role lookups throw ConfigError naming the missing role.
  const gateway::ModelEndpoint& require_teacher() const;
  const gateway::ModelEndpoint& require_prompt_translator() const;
  const gateway::ModelEndpoint& require_judge() const;
  const QeEndpoint& require_qe() const;
  const gateway::ModelEndpoint& require_model(const std::string& model_id) const;

  // Structural checks: endpoints well-formed, languages known, numeric
  // ranges. Throws ConfigError.
  void validate() const;

  // SHA-256 of the canonical serialization of `raw`.
  std::string digest() const;
};

// Parses and validates a config file. Throws ConfigError or IoError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const Json& doc, const std::filesystem::path& base_dir);

// Replaces the base seed (as --seed does). Seeds set explicitly under
// "seeds" keep their values; the rest are re-derived.
void override_seed(PipelineConfig& cfg, std::uint64_t base);

}  // namespace xling
