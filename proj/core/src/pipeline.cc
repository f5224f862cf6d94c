// SPDX-License-Identifier: Apache-2.0
#include "xling/pipeline.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "xling/concurrency.h"
#include "xling/corpus.h"
#include "xling/dataset.h"
#include "xling/digest.h"
#include "xling/directives.h"
#include "xling/evaluation.h"
#include "xling/http_transport.h"
#include "xling/qe.h"
#include "xling/segment.h"
#include "xling/synthesis.h"
#include "xling/templates.h"
#include "xling/translation.h"

namespace xling::pipeline {

namespace fs = std::filesystem;

RunLock::RunLock(const fs::path& dir) : path_(dir / ".xling.lock") {
  fs::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw IoError(path_.string() + " exists: another run is using " + dir.string() +
                    " (remove the lock file if that run is gone)");
    }
    throw IoError("cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Services Services::create(const PipelineConfig& cfg, std::shared_ptr<gateway::Transport> http) {
  Services s;
  s.mock = std::make_shared<gateway::MockTransport>();
  s.cache = std::make_shared<DiskCache>(cfg.cache_dir);
  if (!http) http = std::make_shared<gateway::HttpTransport>();
  auto routing = std::make_shared<gateway::RoutingTransport>(std::move(http), s.mock);
  s.gateway = std::make_unique<gateway::Gateway>(routing, s.cache, cfg.retry, cfg.seeds.jitter);
  return s;
}

namespace {

Json stats_json(const gateway::GatewayStats& st) {
  return {{"backend_calls", st.backend_calls}, {"cache_hits", st.cache_hits}, {"cache_misses", st.cache_misses}};
}

Json seeds_json(const Seeds& s) {
  return {{"base", s.base},           {"sampling", s.sampling}, {"strategy", s.strategy},
          {"filter", s.filter},       {"benchmark", s.benchmark}, {"judge", s.judge},
          {"jitter", s.jitter}};
}

Json endpoint_json(const gateway::ModelEndpoint& e) {
  return {{"model_id", e.model_id}, {"base_url", e.base_url}, {"role", gateway::to_string(e.role)}};
}

Json params_json(const gateway::GenerationParams& p) {
  return {{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"stop", p.stop}};
}

std::vector<Json> read_upstream(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing upstream artifact: " + path.string());
  return read_jsonl(path);
}

Json error_row(std::string_view stage, const std::string& id, const ItemError& e) {
  return {{"stage", stage},
          {"id", id},
          {"kind", to_string(e.kind)},
          {"message", e.message},
          {"attempts", e.attempts}};
}

fs::path errors_path(const fs::path& dir, int stage) {
  return dir / fmt::format("stage{}_errors.jsonl", stage);
}

std::size_t count_errors(const fs::path& dir, int stage, std::map<std::string, std::size_t>& by_kind) {
  const auto path = errors_path(dir, stage);
  if (!fs::exists(path)) throw IoError("missing upstream artifact: " + path.string());
  const auto rows = read_jsonl(path);
  for (const auto& r : rows) ++by_kind[r.value("kind", "unknown")];
  return rows.size();
}

Json passage_json(const corpus::SeedPassage& p) {
  return {{"id", p.id}, {"text", p.text}, {"source", p.source}, {"lang", p.lang}};
}

std::string digest_of(std::initializer_list<std::string> parts) {
  std::string joined;
  for (const auto& p : parts) {
    joined += p;
    joined += '\x1f';
  }
  return sha256_hex(joined);
}

translation::SelectionStrategy make_strategy(const PipelineConfig& cfg) {
  if (cfg.translators.empty()) {
    throw ConfigError("no endpoint configured for role 'translator' (endpoints.translators)");
  }
  translation::SelectionStrategy s;
  if (cfg.strategy == "naive") {
    s = translation::SelectionStrategy::naive(cfg.translators.front());
  } else if (cfg.strategy == "best_of_k") {
    s = translation::SelectionStrategy::best_of_k(cfg.translators);
  } else {
    s = translation::SelectionStrategy::random(cfg.translators, cfg.seeds.strategy);
  }
  s.validate();
  return s;
}

std::shared_ptr<const translation::Segmenter> make_segmenter(const PipelineConfig& cfg, gateway::Gateway& gw) {
  if (cfg.segmenter_url) return std::make_shared<translation::ServiceSegmenter>(gw, *cfg.segmenter_url);
  return std::make_shared<translation::RuleSegmenter>();
}

DirectiveTemplate dataset_directive(const PipelineConfig& cfg, std::string* catalog_version) {
  const auto catalog = DirectiveCatalog::load(cfg.directive_catalog);
  if (catalog_version) *catalog_version = catalog.version;
  auto directive = catalog.find(cfg.directive_template);
  if (cfg.drop_language_word && !directive.drop_language_word) directive = directive.without_language_word();
  return directive;
}

class SynthesizeRun {
 public:
  SynthesizeRun(const PipelineConfig& cfg, Services& services, const SynthesizeOptions& options)
      : cfg_(cfg), services_(services), options_(options), dir_(cfg.output_dir) {
    const auto manifest_path = dir_ / kManifestFile;
    if (fs::exists(manifest_path)) {
      try {
        manifest_ = Json::parse(read_text(manifest_path));
      } catch (const Json::parse_error&) {
        manifest_ = Json::object();
      }
    }
    if (!manifest_.is_object()) manifest_ = Json::object();
    if (!manifest_.contains("stages")) manifest_["stages"] = Json::object();
  }

  SynthesizeResult run() {
    std::vector<int> stages;
    if (options_.stage == "all") {
      stages = {1, 2, 3, 4};
    } else if (options_.stage.size() == 1 && options_.stage[0] >= '1' && options_.stage[0] <= '4') {
      stages = {options_.stage[0] - '0'};
    } else {
      throw ConfigError("--stage must be 1, 2, 3, 4 or all (got '" + options_.stage + "')");
    }
    RunLock lock(dir_);
    for (int stage : stages) {
      switch (stage) {
        case 1:
          step(1, input_digest_1(), dir_ / kStage1File, [&] { stage1(); });
          break;
        case 2:
          step(2, upstream_digest({dir_ / kStage1File}), dir_ / kStage2File, [&] { stage2(); });
          break;
        case 3:
          step(3, upstream_digest({dir_ / kStage2File}), dir_ / kStage3File, [&] { stage3(); });
          break;
        case 4:
          step(4,
               upstream_digest({dir_ / kStage3File, errors_path(dir_, 1), errors_path(dir_, 2),
                                errors_path(dir_, 3)}),
               dir_ / kStage4File, [&] { stage4(); });
          break;
      }
    }
    manifest_["command"] = "synthesize";
    manifest_["config_digest"] = cfg_.digest();
    manifest_["seeds"] = seeds_json(cfg_.seeds);
    manifest_["strategy"] = cfg_.strategy;
    manifest_["languages"] = cfg_.languages;
    result_.stats = services_.gateway->stats();
    manifest_["gateway"] = stats_json(result_.stats);
    write_text_atomic(dir_ / kManifestFile, manifest_.dump(2) + "\n");
    result_.manifest = manifest_;
    return std::move(result_);
  }

 private:
  template <typename Fn>
  void step(int stage, const std::string& input_digest, const fs::path& output, Fn&& body) {
    const std::string key = std::to_string(stage);
    auto& entries = manifest_["stages"];
    if (options_.resume && fs::exists(output) && entries.contains(key)) {
      const auto& prev = entries[key];
      if (prev.value("input_digest", "") == input_digest &&
          prev.value("output_digest", "") == file_sha256(output)) {
        result_.stages_skipped.push_back(key);
        return;
      }
    }
    stage_entry_ = Json::object();
    body();
    stage_entry_["input_digest"] = input_digest;
    stage_entry_["output"] = output.filename().string();
    stage_entry_["output_digest"] = file_sha256(output);
    entries[key] = stage_entry_;
    result_.stages_run.push_back(key);
  }

  std::string input_digest_1() const {
    if (cfg_.corpus_path.empty()) throw ConfigError("no seed corpus configured (corpus.path)");
    if (!fs::exists(cfg_.corpus_path)) throw IoError("seed corpus not found: " + cfg_.corpus_path.string());
    return digest_of({cfg_.digest(), file_sha256(cfg_.corpus_path)});
  }

  std::string upstream_digest(std::initializer_list<fs::path> paths) const {
    std::string joined = cfg_.digest();
    for (const auto& p : paths) {
      if (!fs::exists(p)) throw IoError("missing upstream artifact: " + p.string());
      joined += '\x1f';
      joined += file_sha256(p);
    }
    return sha256_hex(joined);
  }

  synthesis::Synthesizer synthesizer() const {
    return synthesis::Synthesizer(*services_.gateway, cfg_.require_teacher(), cfg_.teacher_params,
                                  load_template(cfg_.templates_dir, "reverse_instruction"),
                                  load_template(cfg_.templates_dir, "refine"));
  }

  void write_errors(int stage, const std::vector<std::pair<std::string, ItemError>>& errors) {
    std::vector<Json> rows;
    for (const auto& [id, e] : errors) rows.push_back(error_row(std::to_string(stage), id, e));
    write_jsonl(errors_path(dir_, stage), rows);
    stage_entry_["errors"] = errors.size();
  }

  void stage1() {
    corpus::SeedReader reader(cfg_.corpus_path, cfg_.corpus_format, "eng", cfg_.corpus_source);
    const auto sample = corpus::sample_passages(reader, cfg_.sampling);
    std::vector<Json> seeds;
    for (const auto& p : sample.passages) seeds.push_back(passage_json(p));
    write_jsonl(dir_ / kStage0File, seeds);

    auto synth = synthesizer();
    auto outcome = synth.generate_batch(sample.passages, cfg_.max_in_flight);
    std::vector<Json> rows;
    for (const auto& pair : outcome.items) rows.push_back(synthesis::to_json(pair));
    write_jsonl(dir_ / kStage1File, rows);
    write_errors(1, outcome.errors);

    stage_entry_["inputs"] = sample.passages.size();
    stage_entry_["outputs"] = outcome.items.size();
    manifest_["sampling"] = {{"requested", sample.requested},
                             {"seen", sample.seen},
                             {"eligible", sample.eligible},
                             {"rejected_length", sample.rejected_length},
                             {"duplicates", sample.duplicates},
                             {"sampled", sample.passages.size()},
                             {"shortfall", sample.shortfall()},
                             {"skipped_lines", reader.stats().skipped},
                             {"warnings", reader.stats().warnings}};
  }

  void stage2() {
    std::vector<synthesis::QAPair> pairs;
    for (const auto& row : read_upstream(dir_ / kStage1File)) pairs.push_back(synthesis::qa_pair_from_json(row));
    auto synth = synthesizer();
    auto outcome = synth.refine_batch(pairs, cfg_.max_in_flight);
    std::vector<Json> rows;
    for (const auto& pair : outcome.items) rows.push_back(synthesis::to_json(pair));
    write_jsonl(dir_ / kStage2File, rows);
    write_errors(2, outcome.errors);
    stage_entry_["inputs"] = pairs.size();
    stage_entry_["outputs"] = outcome.items.size();
  }

  std::vector<std::string> languages_for(std::size_t index) const {
    if (cfg_.assignment == LanguageAssignment::kAll) return cfg_.languages;
    return {cfg_.languages[index % cfg_.languages.size()]};
  }

  void stage3() {
    std::vector<synthesis::QAPair> pairs;
    for (const auto& row : read_upstream(dir_ / kStage2File)) pairs.push_back(synthesis::qa_pair_from_json(row));
    if (cfg_.languages.empty()) throw ConfigError("no target languages configured (languages)");
    const auto strategy = make_strategy(cfg_);
    const auto& qe_cfg = cfg_.require_qe();
    std::string catalog_version;
    const auto directive = dataset_directive(cfg_, &catalog_version);

    qe::QeScorer scorer(*services_.gateway, qe_cfg.scorer_id, qe_cfg.url, qe_cfg.max_batch);
    translation::Translator translator(*services_.gateway, scorer, load_template(cfg_.templates_dir, "translate"),
                                       cfg_.translator_params, make_segmenter(cfg_, *services_.gateway), 1);

    struct Job {
      const synthesis::QAPair* pair;
      std::string lang;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (auto& lang : languages_for(i)) jobs.push_back({&pairs[i], lang});
    }
    std::vector<std::optional<Expected<Json>>> results(jobs.size());
    parallel_for(jobs.size(), cfg_.max_in_flight, [&](std::size_t i) {
      const auto& job = jobs[i];
      try {
        auto translated = translator.translate_response(job.pair->response, "eng", job.lang, strategy);
        if (!translated) {
          results[i].emplace(translated.error());
          return;
        }
        auto example = dataset::wrap_cross_lingual(*job.pair, *translated, job.lang, directive,
                                                   dataset::kDirectiveJoiner, "eng", strategy.tag());
        Json row = dataset::to_json(example);
        row["pair_id"] = job.pair->id;
        row["instruction_en"] = job.pair->instruction;
        row["response_en"] = job.pair->response;
        row["sentence_scores"] = translated->sentence_scores;
        row["sentence_backends"] = translated->sentence_backends;
        results[i].emplace(std::move(row));
      } catch (const Error& e) {
        results[i].emplace(ItemError{ItemErrorKind::kPrecondition, e.what(), 0});
      }
    });

    std::vector<Json> rows;
    std::vector<std::pair<std::string, ItemError>> errors;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& r = *results[i];
      if (r) {
        rows.push_back(std::move(r).value());
      } else {
        errors.emplace_back(jobs[i].pair->id + "#" + jobs[i].lang, r.error());
      }
    }
    write_jsonl(dir_ / kStage3File, rows);
    write_errors(3, errors);
    stage_entry_["inputs"] = jobs.size();
    stage_entry_["outputs"] = rows.size();
    stage_entry_["strategy"] = strategy.tag();
    stage_entry_["scorer_id"] = qe_cfg.scorer_id;
    stage_entry_["template_catalog_version"] = catalog_version;
    stage_entry_["template_id"] = directive.id();
  }

  void stage4() {
    std::vector<dataset::CrossLingualExample> examples;
    for (const auto& row : read_upstream(dir_ / kStage3File)) examples.push_back(dataset::example_from_json(row));

    dataset::DatasetManifest prov;
    std::size_t e1 = count_errors(dir_, 1, prov.drop_counts);
    std::size_t e2 = count_errors(dir_, 2, prov.drop_counts);
    std::size_t e3 = count_errors(dir_, 3, prov.drop_counts);
    const std::size_t generated = read_upstream(dir_ / kStage1File).size();
    const std::size_t refined = read_upstream(dir_ / kStage2File).size();
    const std::size_t sampled = generated + e1;
    const std::size_t units_per_passage =
        cfg_.assignment == LanguageAssignment::kAll ? cfg_.languages.size() : 1;

    std::vector<dataset::ScoredItem> scored;
    scored.reserve(examples.size());
    for (const auto& e : examples) scored.push_back({e.id, e.tgt_lang, e.passage_qe});
    const auto keep = dataset::filter_top(scored, cfg_.filter);
    std::vector<dataset::CrossLingualExample> kept;
    kept.reserve(keep.size());
    for (auto i : keep) kept.push_back(examples[i]);

    std::vector<Json> rows;
    for (const auto& e : kept) rows.push_back(dataset::to_json(e));
    write_jsonl(dir_ / kStage4File, rows);

    prov.inputs = sampled * units_per_passage;
    prov.filtered = examples.size() - kept.size();
    prov.item_errors = (e1 + e2) * units_per_passage + e3;
    prov.stage_counts = {{"stage1", {{"inputs", sampled}, {"outputs", generated}, {"errors", e1}}},
                         {"stage2", {{"inputs", generated}, {"outputs", refined}, {"errors", e2}}},
                         {"stage3", {{"inputs", examples.size() + e3}, {"outputs", examples.size()}, {"errors", e3}}},
                         {"stage4", {{"inputs", examples.size()}, {"outputs", kept.size()}, {"filtered", prov.filtered}}}};
    const auto& s3 = manifest_["stages"].value("3", Json::object());
    prov.strategy = s3.value("strategy", cfg_.strategy);
    prov.scorer_id = s3.value("scorer_id", cfg_.qe ? cfg_.qe->scorer_id : "");
    prov.template_catalog_version = s3.value("template_catalog_version", "");
    prov.template_id = s3.value("template_id", "");

    auto dataset_manifest = dataset::export_sft(kept, dir_ / kSftFile, prov);
    if (!dataset_manifest.reconciles()) {
      throw Error(fmt::format("dataset counts do not reconcile: {} inputs, {} kept, {} filtered, {} errors",
                              dataset_manifest.inputs, dataset_manifest.kept, dataset_manifest.filtered,
                              dataset_manifest.item_errors));
    }
    manifest_["dataset"] = dataset_manifest.to_json();
    stage_entry_["inputs"] = examples.size();
    stage_entry_["outputs"] = kept.size();
    stage_entry_["sft_digest"] = dataset_manifest.content_digest;
  }

  const PipelineConfig& cfg_;
  Services& services_;
  const SynthesizeOptions& options_;
  fs::path dir_;
  Json manifest_;
  Json stage_entry_;
  SynthesizeResult result_;
};

}  // namespace

SynthesizeResult run_synthesize(const PipelineConfig& cfg, Services& services, const SynthesizeOptions& options) {
  return SynthesizeRun(cfg, services, options).run();
}

BenchResult run_bench(const PipelineConfig& cfg, Services& services, const BenchOptions& options) {
  const auto kind = bench::parse_kind(options.kind);
  const bool rtt = options.mode == "rtt" || options.mode == "reason_then_translate";
  if (!rtt && options.mode != "zero_shot") throw ConfigError("--mode must be zero_shot or rtt");
  if (rtt && kind != bench::Kind::kCrossLingual) {
    throw ConfigError("reason-then-translate applies to the cross-lingual (xl) benchmark only");
  }
  if (kind == bench::Kind::kTranslated) cfg.require_prompt_translator();

  auto prompts = bench::load_base_prompts(cfg.base_prompts);
  std::vector<bench::Exclusion> exclusions;
  if (fs::exists(cfg.exclusions)) exclusions = bench::load_exclusions(cfg.exclusions);
  BenchResult result;
  result.counts = bench::apply_exclusions(prompts, exclusions);

  std::vector<bench::BenchmarkItem> items;
  std::vector<Json> errors;
  Json inputs = {{"base_prompts", file_sha256(cfg.base_prompts)},
                 {"exclusions", fs::exists(cfg.exclusions) ? file_sha256(cfg.exclusions) : ""}};
  if (kind == bench::Kind::kCrossLingual) {
    const auto catalog = DirectiveCatalog::load(cfg.directive_catalog);
    inputs["directive_catalog"] = file_sha256(cfg.directive_catalog);
    items = bench::build_xl_benchmark(prompts, cfg.benchmark_languages, catalog, cfg.seeds.benchmark);
    if (rtt) {
      const auto tpl = load_template(cfg.templates_dir, "reason_then_translate");
      for (auto& item : items) item = bench::render_reason_then_translate(item, tpl);
    }
  } else {
    qe::QeScorer unused(*services.gateway, "unused", "mock://qe/unused");
    translation::Translator translator(*services.gateway, unused, load_template(cfg.templates_dir, "translate"),
                                       cfg.translator_params);
    auto built = bench::build_translated_benchmark(prompts, cfg.benchmark_languages, translator,
                                                   cfg.require_prompt_translator(), cfg.max_in_flight);
    items = std::move(built.items);
    for (const auto& [id, e] : built.errors) errors.push_back(error_row("bench", id, e));
  }

  const std::string default_name = kind == bench::Kind::kTranslated
                                       ? std::string("bench_translated.jsonl")
                                       : fmt::format("bench_xl_{}.jsonl", rtt ? "rtt" : "zero_shot");
  result.path = options.out ? *options.out : cfg.output_dir / default_name;
  write_benchmark(result.path, items);
  result.items = items.size();
  result.item_errors = errors.size();
  result.manifest = {{"command", "bench"},
                     {"kind", bench::to_string(kind)},
                     {"mode", rtt ? "reason_then_translate" : (kind == bench::Kind::kTranslated ? "same_language" : "zero_shot")},
                     {"languages", cfg.benchmark_languages},
                     {"counts",
                      {{"total", result.counts.total},
                       {"excluded", result.counts.excluded},
                       {"eligible", result.counts.eligible},
                       {"items", result.items},
                       {"item_errors", result.item_errors}}},
                     {"errors", errors},
                     {"config_digest", cfg.digest()},
                     {"seeds", {{"benchmark", cfg.seeds.benchmark}}},
                     {"input_digests", inputs},
                     {"content_digest", file_sha256(result.path)}};
  write_text_atomic(dataset::manifest_path_for(result.path), result.manifest.dump(2) + "\n");
  return result;
}

namespace {

using OutputKey = std::pair<std::string, std::string>;  // (item_id, model_id)
using RubricKey = std::tuple<std::string, std::string, eval::Criterion>;

template <typename Fn>
void for_rows(const fs::path& path, Fn&& fn) {
  if (!fs::exists(path)) return;
  for (const auto& row : read_jsonl(path)) fn(row);
}

}  // namespace

EvalResult run_eval(const PipelineConfig& cfg, Services& services, const EvalOptions& options) {
  const auto& candidate = cfg.require_model(options.candidate);
  const auto& reference = cfg.require_model(options.reference);
  const auto& judge = cfg.require_judge();
  if (candidate.model_id == reference.model_id) throw ConfigError("candidate and reference must differ");
  if (!fs::exists(options.benchmark)) throw IoError("benchmark file not found: " + options.benchmark.string());
  const auto items = bench::load_benchmark(options.benchmark);
  if (items.empty()) throw ConfigError("benchmark " + options.benchmark.string() + " has no items");
  const std::string bench_digest = file_sha256(options.benchmark);

  const std::string run_id = options.run_id.empty() ? candidate.model_id + "__vs__" + reference.model_id
                                                    : options.run_id;
  EvalResult result;
  result.run_dir = cfg.runs_dir / sanitize_cache_space(run_id);
  RunLock lock(result.run_dir);

  const auto manifest_path = result.run_dir / kManifestFile;
  if (fs::exists(manifest_path)) {
    if (!options.resume) {
      throw IoError("run directory " + result.run_dir.string() + " already holds a run; pass --resume");
    }
    const auto prev = Json::parse(read_text(manifest_path));
    if (prev.at("benchmark").value("digest", "") != bench_digest) {
      throw PreconditionError("benchmark " + options.benchmark.string() +
                              " differs from the one recorded for run " + run_id);
    }
    if (prev.at("candidate").value("model_id", "") != candidate.model_id ||
        prev.at("reference").value("model_id", "") != reference.model_id) {
      throw PreconditionError("run " + run_id + " was started with different models");
    }
  }

  const auto out_path = result.run_dir / "outputs.jsonl";
  const auto verdict_path = result.run_dir / "verdicts.jsonl";
  const auto rubric_path = result.run_dir / "rubrics.jsonl";
  const auto errors_path_eval = result.run_dir / "errors.jsonl";

  std::map<OutputKey, eval::ModelOutput> outputs;
  std::map<std::string, eval::JudgeVerdict> verdicts;
  std::map<RubricKey, eval::RubricScore> rubrics;
  for_rows(out_path, [&](const Json& r) {
    auto o = eval::output_from_json(r);
    outputs[{o.item_id, o.model_id}] = std::move(o);
  });
  for_rows(verdict_path, [&](const Json& r) {
    auto v = eval::verdict_from_json(r);
    verdicts[v.item_id] = std::move(v);
  });
  for_rows(rubric_path, [&](const Json& r) {
    auto s = eval::rubric_score_from_json(r);
    rubrics[{s.item_id, s.model_id, s.criterion}] = std::move(s);
  });

  eval::PairwiseJudge pairwise(*services.gateway, judge, load_template(cfg.templates_dir, "judge_pairwise"),
                               cfg.judge_params, cfg.seeds.judge);
  std::optional<eval::RubricJudge> rubric_judge;
  if (options.rubrics) {
    rubric_judge.emplace(eval::RubricJudge::from_dir(*services.gateway, judge, cfg.templates_dir, cfg.judge_params));
  }

  JsonlAppender out_app(out_path);
  JsonlAppender verdict_app(verdict_path);
  JsonlAppender rubric_app(rubric_path);
  JsonlAppender error_app(errors_path_eval);

  const std::size_t chunk = std::max<std::size_t>(64, cfg.max_in_flight * 8);
  std::size_t rubric_errors = 0;
  for (std::size_t begin = 0; begin < items.size(); begin += chunk) {
    const std::size_t end = std::min(items.size(), begin + chunk);
    std::set<std::string> regenerated;

    for (const auto* model : {&candidate, &reference}) {
      std::vector<bench::BenchmarkItem> missing;
      for (std::size_t i = begin; i < end; ++i) {
        auto it = outputs.find({items[i].item_id, model->model_id});
        if (it == outputs.end() || it->second.errored) missing.push_back(items[i]);
      }
      if (missing.empty()) continue;
      auto generated = eval::generate_outputs(*services.gateway, *model, missing, cfg.candidate_params, cfg.max_in_flight);
      for (auto& o : generated) {
        out_app.append(eval::to_json(o));
        if (o.errored) error_app.append({{"phase", "generate"}, {"item_id", o.item_id}, {"model_id", o.model_id}, {"message", o.error}});
        regenerated.insert(o.item_id);
        outputs[{o.item_id, o.model_id}] = std::move(o);
        ++result.outputs_generated;
      }
    }
    out_app.flush();

    std::vector<bench::BenchmarkItem> to_judge;
    std::vector<eval::ModelOutput> cands, refs;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& id = items[i].item_id;
      auto it = verdicts.find(id);
      if (it != verdicts.end() && !it->second.is_error() && !regenerated.contains(id)) continue;
      to_judge.push_back(items[i]);
      cands.push_back(outputs.at({id, candidate.model_id}));
      refs.push_back(outputs.at({id, reference.model_id}));
    }
    if (!to_judge.empty()) {
      for (auto& v : pairwise.judge_batch(to_judge, cands, refs, cfg.max_in_flight)) {
        verdict_app.append(eval::to_json(v));
        if (v.is_error()) error_app.append({{"phase", "judge"}, {"item_id", v.item_id}, {"message", v.error}});
        verdicts[v.item_id] = std::move(v);
        ++result.verdicts_judged;
      }
      verdict_app.flush();
    }

    if (rubric_judge) {
      std::vector<eval::RubricJudge::Job> jobs;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& output = outputs.at({items[i].item_id, candidate.model_id});
        if (output.errored) continue;
        for (auto c : eval::kAllCriteria) {
          if (rubrics.contains({items[i].item_id, candidate.model_id, c}) && !regenerated.contains(items[i].item_id)) {
            continue;
          }
          jobs.push_back({&items[i], &output, c});
        }
      }
      auto scores = rubric_judge->score_batch(jobs, cfg.max_in_flight);
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (scores[j]) {
          auto& s = *scores[j];
          rubric_app.append(eval::to_json(s));
          rubrics[{s.item_id, s.model_id, s.criterion}] = s;
        } else {
          ++rubric_errors;
          error_app.append({{"phase", "rubric"},
                            {"item_id", jobs[j].item->item_id},
                            {"criterion", eval::to_string(jobs[j].criterion)},
                            {"kind", to_string(scores[j].error().kind)},
                            {"message", scores[j].error().message}});
        }
      }
      rubric_app.flush();
    }
    error_app.flush();
  }

  std::vector<eval::JudgeVerdict> ordered_verdicts;
  std::vector<eval::RubricScore> ordered_rubrics;
  std::size_t cand_errors = 0, ref_errors = 0;
  for (const auto& item : items) {
    ordered_verdicts.push_back(verdicts.at(item.item_id));
    cand_errors += outputs.at({item.item_id, candidate.model_id}).errored ? 1 : 0;
    ref_errors += outputs.at({item.item_id, reference.model_id}).errored ? 1 : 0;
    for (auto c : eval::kAllCriteria) {
      auto it = rubrics.find({item.item_id, candidate.model_id, c});
      if (it != rubrics.end()) ordered_rubrics.push_back(it->second);
    }
  }

  auto& report = result.report;
  report.run_id = run_id;
  report.candidate = candidate.model_id;
  report.reference = reference.model_id;
  report.win_rates = eval::aggregate_win_rates(ordered_verdicts);
  if (options.rubrics && !ordered_rubrics.empty()) report.rubrics = eval::aggregate_rubrics(ordered_rubrics);

  write_jsonl(result.run_dir / "report.jsonl", eval::report_rows(report));
  write_text_atomic(result.run_dir / "report.csv", eval::report_csv(report));
  write_text_atomic(result.run_dir / "report.md", eval::report_markdown(report));

  std::size_t verdict_errors = 0;
  for (const auto& v : ordered_verdicts) verdict_errors += v.is_error() ? 1 : 0;
  result.manifest = {{"command", "eval"},
                     {"run_id", run_id},
                     {"candidate", endpoint_json(candidate)},
                     {"reference", endpoint_json(reference)},
                     {"judge", endpoint_json(judge)},
                     {"params", {{"candidate", params_json(cfg.candidate_params)}, {"judge", params_json(cfg.judge_params)}}},
                     {"benchmark", {{"path", options.benchmark.string()}, {"digest", bench_digest}, {"items", items.size()}}},
                     {"config_digest", cfg.digest()},
                     {"seeds", {{"judge", cfg.seeds.judge}, {"jitter", cfg.seeds.jitter}}},
                     {"rubrics", options.rubrics},
                     {"counts",
                      {{"candidate_output_errors", cand_errors},
                       {"reference_output_errors", ref_errors},
                       {"verdict_errors", verdict_errors},
                       {"rubric_errors", rubric_errors},
                       {"rubric_scores", ordered_rubrics.size()}}},
                     {"gateway", stats_json(services.gateway->stats())}};
  write_text_atomic(manifest_path, result.manifest.dump(2) + "\n");
  return result;
}

eval::EvalReport load_report(const fs::path& run_dir) {
  const auto manifest_path = run_dir / kManifestFile;
  if (!fs::exists(manifest_path)) throw IoError("no run manifest at " + manifest_path.string());
  const auto manifest = Json::parse(read_text(manifest_path));
  eval::EvalReport report;
  report.run_id = manifest.value("run_id", run_dir.filename().string());
  report.candidate = manifest.at("candidate").value("model_id", "");
  report.reference = manifest.at("reference").value("model_id", "");

  std::map<std::string, eval::JudgeVerdict> verdicts;
  for_rows(run_dir / "verdicts.jsonl", [&](const Json& r) {
    auto v = eval::verdict_from_json(r);
    verdicts[v.item_id] = std::move(v);
  });
  if (verdicts.empty()) throw IoError("run " + run_dir.string() + " has no verdicts");
  std::vector<eval::JudgeVerdict> list;
  for (auto& [_, v] : verdicts) list.push_back(std::move(v));
  report.win_rates = eval::aggregate_win_rates(list);

  std::map<RubricKey, eval::RubricScore> rubrics;
  for_rows(run_dir / "rubrics.jsonl", [&](const Json& r) {
    auto s = eval::rubric_score_from_json(r);
    rubrics[{s.item_id, s.model_id, s.criterion}] = std::move(s);
  });
  if (!rubrics.empty()) {
    std::vector<eval::RubricScore> scores;
    for (auto& [_, s] : rubrics) scores.push_back(std::move(s));
    report.rubrics = eval::aggregate_rubrics(scores);
  }
  return report;
}

std::string run_report(std::span<const fs::path> run_dirs) {
  if (run_dirs.size() == 1) return eval::report_markdown(load_report(run_dirs[0]));
  if (run_dirs.size() == 2) {
    const auto base = load_report(run_dirs[0]);
    const auto other = load_report(run_dirs[1]);
    return eval::delta_markdown(eval::delta(base.win_rates, other.win_rates), base.run_id, other.run_id);
  }
  throw ConfigError("report takes one run directory, or two for a delta");
}

}  // namespace xling::pipeline
