// SPDX-License-Identifier: Apache-2.0
#include "xling/benchmark.h"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "xling/concurrency.h"
#include "xling/languages.h"
#include "xling/rng.h"

namespace xling::bench {

std::vector<BasePrompt> load_base_prompts(const std::filesystem::path& path) {
  std::vector<BasePrompt> prompts;
  std::set<int> ids;
  for (const auto& row : read_jsonl(path)) {
    BasePrompt p;
    try {
      p.prompt_id = row.at("prompt_id").get<int>();
      p.text = row.at("text").get<std::string>();
    } catch (const Json::exception& e) {
      throw ConfigError("malformed base prompt in " + path.string() + ": " + e.what());
    }
    if (!ids.insert(p.prompt_id).second) {
      throw ConfigError("duplicate prompt_id " + std::to_string(p.prompt_id) + " in " + path.string());
    }
    prompts.push_back(std::move(p));
  }
  return prompts;
}

std::vector<Exclusion> load_exclusions(const std::filesystem::path& path) {
  std::vector<Exclusion> out;
  for (const auto& row : read_jsonl(path)) {
    try {
      out.push_back({row.at("prompt_id").get<int>(), row.value("reason", "")});
    } catch (const Json::exception& e) {
      throw ConfigError("malformed exclusion in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

PromptCounts apply_exclusions(std::vector<BasePrompt>& prompts, std::span<const Exclusion> exclusions) {
  std::map<int, BasePrompt*> by_id;
  for (auto& p : prompts) by_id[p.prompt_id] = &p;
  for (const auto& ex : exclusions) {
    auto it = by_id.find(ex.prompt_id);
    if (it == by_id.end()) {
      throw ConfigError("exclusion list names unknown prompt_id " + std::to_string(ex.prompt_id));
    }
    it->second->excluded = true;
    it->second->exclusion_reason = ex.reason;
  }
  PromptCounts counts;
  counts.total = prompts.size();
  counts.excluded = static_cast<std::size_t>(
      std::count_if(prompts.begin(), prompts.end(), [](const BasePrompt& p) { return p.excluded; }));
  counts.eligible = counts.total - counts.excluded;
  return counts;
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kZeroShot:
      return "zero_shot";
    case Mode::kReasonThenTranslate:
      return "reason_then_translate";
    case Mode::kSameLanguage:
      return "same_language";
  }
  return "zero_shot";
}

std::string_view to_string(Kind kind) {
  return kind == Kind::kCrossLingual ? "cross_lingual" : "translated";
}

Mode parse_mode(std::string_view name) {
  if (name == "zero_shot") return Mode::kZeroShot;
  if (name == "reason_then_translate" || name == "rtt") return Mode::kReasonThenTranslate;
  if (name == "same_language") return Mode::kSameLanguage;
  throw ConfigError("unknown benchmark mode '" + std::string(name) + "'");
}

Kind parse_kind(std::string_view name) {
  if (name == "cross_lingual" || name == "xl") return Kind::kCrossLingual;
  if (name == "translated") return Kind::kTranslated;
  throw ConfigError("unknown benchmark kind '" + std::string(name) + "'");
}

Json to_json(const BenchmarkItem& item) {
  return {{"item_id", item.item_id},
          {"prompt_id", item.prompt_id},
          {"base_text", item.base_text},
          {"rendered_prompt", item.rendered_prompt},
          {"tgt_lang", item.tgt_lang},
          {"template_id", item.template_id},
          {"mode", to_string(item.mode)},
          {"benchmark_kind", to_string(item.kind)}};
}

BenchmarkItem item_from_json(const Json& row) {
  try {
    BenchmarkItem item;
    item.item_id = row.at("item_id").get<std::string>();
    item.prompt_id = row.at("prompt_id").get<int>();
    item.base_text = row.value("base_text", "");
    item.rendered_prompt = row.at("rendered_prompt").get<std::string>();
    item.tgt_lang = row.at("tgt_lang").get<std::string>();
    item.template_id = row.value("template_id", "");
    item.mode = parse_mode(row.at("mode").get<std::string>());
    item.kind = parse_kind(row.at("benchmark_kind").get<std::string>());
    return item;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed benchmark item: ") + e.what());
  }
}

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path) {
  std::vector<BenchmarkItem> items;
  for (const auto& row : read_jsonl(path)) items.push_back(item_from_json(row));
  return items;
}

void write_benchmark(const std::filesystem::path& path, std::span<const BenchmarkItem> items) {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const auto& item : items) rows.push_back(to_json(item));
  write_jsonl(path, rows);
}

std::string fill_language_slot(std::string_view text, std::string_view language_name) {
  static constexpr std::string_view kSlot = "{language}";
  std::string out(text);
  for (auto pos = out.find(kSlot); pos != std::string::npos; pos = out.find(kSlot, pos + language_name.size())) {
    out.replace(pos, kSlot.size(), language_name);
  }
  return out;
}

namespace {

std::vector<const BasePrompt*> eligible_sorted(std::span<const BasePrompt> prompts) {
  std::vector<const BasePrompt*> eligible;
  for (const auto& p : prompts) {
    if (!p.excluded) eligible.push_back(&p);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const BasePrompt* a, const BasePrompt* b) { return a->prompt_id < b->prompt_id; });
  return eligible;
}

std::vector<std::string> sorted_langs(std::span<const std::string> langs) {
  std::vector<std::string> out(langs.begin(), langs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (const auto& code : out) languages::require_display_name(code);
  return out;
}

}  // namespace

std::vector<BenchmarkItem> build_xl_benchmark(std::span<const BasePrompt> prompts,
                                              std::span<const std::string> langs,
                                              const DirectiveCatalog& catalog, std::uint64_t rng_seed,
                                              std::string_view joiner) {
  const auto eligible = eligible_sorted(prompts);
  if (eligible.empty()) throw ConfigError("no eligible base prompts");
  if (catalog.templates.empty()) throw ConfigError("directive catalog is empty");
  const auto codes = sorted_langs(langs);

  std::vector<BenchmarkItem> items;
  items.reserve(eligible.size() * codes.size());
  for (const BasePrompt* p : eligible) {
    for (const auto& code : codes) {
      const auto name = languages::require_display_name(code);
      Rng rng(derive_seed(rng_seed, std::to_string(p->prompt_id) + "\x1f" + code));
      DirectiveTemplate directive = catalog.templates[rng.below(catalog.templates.size())];
      if (rng.coin()) directive = directive.without_language_word();

      BenchmarkItem item;
      item.item_id = "xl-" + std::to_string(p->prompt_id) + "-" + code;
      item.prompt_id = p->prompt_id;
      item.base_text = fill_language_slot(p->text, name);
      item.rendered_prompt = item.base_text + std::string(joiner) + directive.render(name);
      item.tgt_lang = code;
      item.template_id = directive.id();
      item.mode = Mode::kZeroShot;
      item.kind = Kind::kCrossLingual;
      items.push_back(std::move(item));
    }
  }
  return items;
}

TranslatedBuild build_translated_benchmark(std::span<const BasePrompt> prompts,
                                           std::span<const std::string> langs,
                                           translation::Translator& translator,
                                           const gateway::ModelEndpoint& prompt_translator,
                                           std::size_t max_in_flight) {
  const auto eligible = eligible_sorted(prompts);
  if (eligible.empty()) throw ConfigError("no eligible base prompts");
  std::vector<std::string> with_english(langs.begin(), langs.end());
  with_english.push_back("eng");
  const auto codes = sorted_langs(with_english);

  struct Job {
    const BasePrompt* prompt;
    std::string code;
  };
  std::vector<Job> jobs;
  for (const BasePrompt* p : eligible) {
    for (const auto& code : codes) jobs.push_back({p, code});
  }

  std::vector<std::optional<Expected<std::string>>> results(jobs.size());
  parallel_for(jobs.size(), max_in_flight, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto name = languages::require_display_name(job.code);
    std::string source = fill_language_slot(job.prompt->text, name);
    if (job.code == "eng") {
      results[i].emplace(std::move(source));
    } else {
      results[i].emplace(translator.translate_text(source, "eng", job.code, prompt_translator));
    }
  });

  TranslatedBuild build;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    const std::string id = "mt-" + std::to_string(job.prompt->prompt_id) + "-" + job.code;
    auto& result = *results[i];
    if (!result) {
      build.errors.emplace_back(id, result.error());
      continue;
    }
    BenchmarkItem item;
    item.item_id = id;
    item.prompt_id = job.prompt->prompt_id;
    item.base_text = job.prompt->text;
    item.rendered_prompt = std::move(result).value();
    item.tgt_lang = job.code;
    item.mode = Mode::kSameLanguage;
    item.kind = Kind::kTranslated;
    build.items.push_back(std::move(item));
  }
  return build;
}

BenchmarkItem render_reason_then_translate(const BenchmarkItem& item, const PromptTemplate& rtt) {
  if (item.kind != Kind::kCrossLingual) {
    throw PreconditionError("reason-then-translate applies to cross-lingual items only");
  }
  if (item.mode != Mode::kZeroShot) {
    throw PreconditionError("item " + item.item_id + " is already in " + std::string(to_string(item.mode)) + " mode");
  }
  rtt.require({"prompt", "language"});
  BenchmarkItem out = item;
  out.rendered_prompt =
      render(rtt.text, {{"prompt", item.rendered_prompt},
                        {"language", std::string(languages::require_display_name(item.tgt_lang))}});
  out.mode = Mode::kReasonThenTranslate;
  return out;
}

}  // namespace xling::bench
