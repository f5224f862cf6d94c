// SPDX-License-Identifier: Apache-2.0
#include "xling/config.h"

#include <set>

#include "xling/digest.h"
#include "xling/languages.h"
#include "xling/rng.h"
#include "xling/templates.h"
#include "xling/translation.h"

namespace xling {

Seeds Seeds::from_base(std::uint64_t base) {
  Seeds s;
  s.base = base;
  s.sampling = derive_seed(base, "sampling");
  s.strategy = derive_seed(base, "strategy");
  s.filter = derive_seed(base, "filter");
  s.benchmark = derive_seed(base, "benchmark");
  s.judge = derive_seed(base, "judge");
  s.jitter = derive_seed(base, "jitter");
  return s;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path.lexically_normal();
}

gateway::ModelEndpoint parse_endpoint(const Json& j, gateway::Role role, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": endpoint must be an object");
  gateway::ModelEndpoint e;
  e.model_id = j.at("model_id").get<std::string>();
  e.base_url = j.at("base_url").get<std::string>();
  e.auth_env = j.value("auth_env", "");
  e.role = role;
  try {
    e.validate();
  } catch (const Error& err) {
    throw ConfigError(where + ": " + err.what());
  }
  return e;
}

void parse_params(const Json& j, gateway::GenerationParams& p, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  if (j.contains("stop")) p.stop = j.at("stop").get<std::vector<std::string>>();
  try {
    p.validate();
  } catch (const Error& err) {
    throw ConfigError(where + ": " + err.what());
  }
}

Seeds parse_seeds(const Json& doc) {
  Seeds s = Seeds::from_base(doc.value("seed", std::uint64_t{0}));
  if (!doc.contains("seeds")) return s;
  const auto& j = doc.at("seeds");
  s.sampling = j.value("sampling", s.sampling);
  s.strategy = j.value("strategy", s.strategy);
  s.filter = j.value("filter", s.filter);
  s.benchmark = j.value("benchmark", s.benchmark);
  s.judge = j.value("judge", s.judge);
  s.jitter = j.value("jitter", s.jitter);
  return s;
}

PipelineConfig parse_config_impl(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig cfg;
  cfg.raw = doc;
  const std::filesystem::path data_dir = default_data_dir();

  const Json endpoints = doc.value("endpoints", Json::object());
  if (endpoints.contains("teacher")) {
    cfg.teacher = parse_endpoint(endpoints.at("teacher"), gateway::Role::kTeacher, "endpoints.teacher");
  }
  if (endpoints.contains("translators")) {
    std::size_t i = 0;
    for (const auto& t : endpoints.at("translators")) {
      cfg.translators.push_back(parse_endpoint(t, gateway::Role::kTranslator,
                                               "endpoints.translators[" + std::to_string(i++) + "]"));
    }
  }
  if (endpoints.contains("prompt_translator")) {
    cfg.prompt_translator = parse_endpoint(endpoints.at("prompt_translator"),
                                           gateway::Role::kPromptTranslator, "endpoints.prompt_translator");
  }
  if (endpoints.contains("judge")) {
    cfg.judge = parse_endpoint(endpoints.at("judge"), gateway::Role::kJudge, "endpoints.judge");
  }
  if (endpoints.contains("models")) {
    std::size_t i = 0;
    for (const auto& m : endpoints.at("models")) {
      cfg.models.push_back(parse_endpoint(m, gateway::Role::kCandidate,
                                          "endpoints.models[" + std::to_string(i++) + "]"));
    }
  }
  if (endpoints.contains("qe")) {
    const auto& q = endpoints.at("qe");
    QeEndpoint qe;
    qe.scorer_id = q.at("scorer_id").get<std::string>();
    qe.url = q.at("url").get<std::string>();
    qe.max_batch = q.value("max_batch", qe.max_batch);
    cfg.qe = qe;
  }
  if (endpoints.contains("segmenter")) {
    cfg.segmenter_url = endpoints.at("segmenter").at("url").get<std::string>();
  }

  const Json params = doc.value("params", Json::object());
  if (params.contains("teacher")) parse_params(params.at("teacher"), cfg.teacher_params, "params.teacher");
  if (params.contains("translator")) {
    parse_params(params.at("translator"), cfg.translator_params, "params.translator");
  }
  if (params.contains("judge")) parse_params(params.at("judge"), cfg.judge_params, "params.judge");
  if (params.contains("candidate")) {
    parse_params(params.at("candidate"), cfg.candidate_params, "params.candidate");
  }

  if (doc.contains("retry")) {
    const auto& r = doc.at("retry");
    cfg.retry.max_attempts = r.value("max_attempts", cfg.retry.max_attempts);
    cfg.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", cfg.retry.base_delay.count()));
    cfg.retry.factor = r.value("factor", cfg.retry.factor);
    cfg.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", cfg.retry.max_delay.count()));
  }
  cfg.max_in_flight = doc.value("max_in_flight", cfg.max_in_flight);

  cfg.seeds = parse_seeds(doc);

  if (doc.contains("corpus")) {
    const auto& c = doc.at("corpus");
    cfg.corpus_path = resolve(base_dir, c.at("path").get<std::string>());
    cfg.corpus_format = corpus::parse_seed_format(c.value("format", "plain-lines"));
    cfg.corpus_source = c.value("source", cfg.corpus_path.stem().string());
    cfg.sampling.count = c.value("count", cfg.sampling.count);
    cfg.sampling.min_chars = c.value("min_chars", cfg.sampling.min_chars);
    cfg.sampling.max_chars = c.value("max_chars", cfg.sampling.max_chars);
    cfg.sampling.dedup = c.value("dedup", cfg.sampling.dedup);
  }
  cfg.sampling.rng_seed = cfg.seeds.sampling;

  cfg.languages = doc.value("languages", std::vector<std::string>{});
  const std::string assignment = doc.value("language_assignment", "all");
  if (assignment == "all") {
    cfg.assignment = LanguageAssignment::kAll;
  } else if (assignment == "round_robin") {
    cfg.assignment = LanguageAssignment::kRoundRobin;
  } else {
    throw ConfigError("language_assignment must be 'all' or 'round_robin'");
  }
  cfg.strategy = doc.value("strategy", cfg.strategy);

  if (doc.contains("filter")) {
    const auto& f = doc.at("filter");
    cfg.filter.keep_fraction = f.value("keep_fraction", cfg.filter.keep_fraction);
    cfg.filter.scope = dataset::parse_filter_scope(f.value("scope", "per_language"));
    cfg.filter.selection = dataset::parse_filter_selection(f.value("selection", "top_qe"));
  }
  cfg.filter.rng_seed = cfg.seeds.filter;

  const Json templates = doc.value("templates", Json::object());
  cfg.templates_dir = templates.contains("dir") ? resolve(base_dir, templates.at("dir").get<std::string>())
                                                : data_dir / "prompts";
  cfg.directive_catalog = templates.contains("directive_catalog")
                              ? resolve(base_dir, templates.at("directive_catalog").get<std::string>())
                              : data_dir / "benchmark" / "directive_templates.v1.json";
  cfg.directive_template = templates.value("directive", cfg.directive_template);
  cfg.drop_language_word = templates.value("drop_language_word", cfg.drop_language_word);

  const Json bench = doc.value("benchmark", Json::object());
  cfg.base_prompts = bench.contains("base_prompts")
                         ? resolve(base_dir, bench.at("base_prompts").get<std::string>())
                         : data_dir / "benchmark" / "base_prompts.jsonl";
  cfg.exclusions = bench.contains("exclusions") ? resolve(base_dir, bench.at("exclusions").get<std::string>())
                                                : data_dir / "benchmark" / "exclusions.jsonl";
  if (bench.contains("languages")) {
    cfg.benchmark_languages = bench.at("languages").get<std::vector<std::string>>();
  } else {
    cfg.benchmark_languages.assign(languages::kBenchmarkLanguages.begin(),
                                   languages::kBenchmarkLanguages.end());
  }

  // Working locations follow the invoking directory, not the config file.
  cfg.cache_dir = std::filesystem::path(doc.value("cache_dir", ".xling-cache")).lexically_normal();
  cfg.output_dir = std::filesystem::path(doc.value("output_dir", "out")).lexically_normal();
  cfg.runs_dir = std::filesystem::path(doc.value("runs_dir", "runs")).lexically_normal();
  return cfg;
}

}  // namespace

const gateway::ModelEndpoint& PipelineConfig::require_teacher() const {
  if (!teacher) throw ConfigError("no endpoint configured for role 'teacher' (endpoints.teacher)");
  return *teacher;
}

const gateway::ModelEndpoint& PipelineConfig::require_prompt_translator() const {
  if (!prompt_translator) {
    throw ConfigError("no endpoint configured for role 'prompt_translator' (endpoints.prompt_translator)");
  }
  return *prompt_translator;
}

const gateway::ModelEndpoint& PipelineConfig::require_judge() const {
  if (!judge) throw ConfigError("no endpoint configured for role 'judge' (endpoints.judge)");
  return *judge;
}

const QeEndpoint& PipelineConfig::require_qe() const {
  if (!qe) throw ConfigError("no quality-estimation endpoint configured (endpoints.qe)");
  return *qe;
}

const gateway::ModelEndpoint& PipelineConfig::require_model(const std::string& model_id) const {
  for (const auto& m : models) {
    if (m.model_id == model_id) return m;
  }
  throw ConfigError("model '" + model_id + "' is not listed in endpoints.models");
}

void PipelineConfig::validate() const {
  for (const auto& code : languages) {
    languages::require_display_name(code);
    if (code == "eng") throw ConfigError("languages: target languages must differ from English");
  }
  if (std::set<std::string>(languages.begin(), languages.end()).size() != languages.size()) {
    throw ConfigError("languages: duplicate entries");
  }
  for (const auto& code : benchmark_languages) languages::require_display_name(code);
  std::set<std::string> model_ids;
  for (const auto& m : models) {
    if (!model_ids.insert(m.model_id).second) {
      throw ConfigError("endpoints.models: duplicate model_id '" + m.model_id + "'");
    }
  }
  if (strategy != "naive" && strategy != "best_of_k" && strategy != "random") {
    throw ConfigError("strategy must be naive, best_of_k or random");
  }
  if (max_in_flight == 0) throw ConfigError("max_in_flight must be positive");
  if (qe && (qe->scorer_id.empty() || qe->url.empty() || qe->max_batch == 0)) {
    throw ConfigError("endpoints.qe needs scorer_id, url and a positive max_batch");
  }
  retry.validate();
  filter.validate();
  sampling.validate();
}

std::string PipelineConfig::digest() const { return sha256_hex(dump_compact(raw)); }

PipelineConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  try {
    cfg = parse_config_impl(doc, base_dir);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void override_seed(PipelineConfig& cfg, std::uint64_t base) {
  cfg.raw["seed"] = base;
  cfg.seeds = parse_seeds(cfg.raw);
  cfg.sampling.rng_seed = cfg.seeds.sampling;
  cfg.filter.rng_seed = cfg.seeds.filter;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  auto cfg = parse_config(doc, path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace xling
