// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "test_support.h"
#include "xling/config.h"
#include "xling/digest.h"
#include "xling/pipeline.h"
#include "xling/rng.h"

namespace xling {
namespace {

const std::filesystem::path kData = XLING_TEST_DATA_DIR;

Json mock_doc() { return Json::parse(read_text(kData / "configs/mock.json")); }

PipelineConfig small_config(const testing::TempDir& dir, std::size_t count = 8) {
  auto cfg = load_config(kData / "configs/mock.json");
  cfg.cache_dir = dir.path() / "cache";
  cfg.output_dir = dir.path() / "out";
  cfg.runs_dir = dir.path() / "runs";
  cfg.sampling.count = count;
  cfg.languages = {"deu", "zho"};
  return cfg;
}

TEST(Config, BundledMockConfigLoads) {
  auto cfg = load_config(kData / "configs/mock.json");
  EXPECT_EQ(cfg.seeds.base, 20250101u);
  EXPECT_EQ(cfg.translators.size(), 3u);
  EXPECT_EQ(cfg.require_teacher().model_id, "mock-teacher");
  EXPECT_EQ(cfg.require_model("mock-reference").base_url, "mock://candidate/ref");
  EXPECT_EQ(cfg.corpus_format, corpus::SeedFormat::kRecordStream);
  EXPECT_TRUE(std::filesystem::is_regular_file(cfg.corpus_path));
  EXPECT_TRUE(std::filesystem::is_directory(cfg.templates_dir));
  EXPECT_EQ(cfg.benchmark_languages.size(), 8u);
  EXPECT_DOUBLE_EQ(cfg.judge_params.temperature, 0.0);
  EXPECT_EQ(cfg.judge_params.max_tokens, 1024);
  EXPECT_EQ(cfg.filter.scope, dataset::FilterScope::kPerLanguage);
  EXPECT_EQ(cfg.seeds.sampling, derive_seed(20250101, "sampling"));
}

TEST(Config, MissingRolesAndBadValues) {
  auto doc = mock_doc();
  doc["endpoints"].erase("judge");
  auto cfg = parse_config(doc, kData / "configs");
  try {
    cfg.require_judge();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("judge"), std::string::npos);
  }
  EXPECT_THROW(cfg.require_model("nobody"), ConfigError);

  auto bad_lang = mock_doc();
  bad_lang["languages"] = {"deu", "xyz"};
  EXPECT_THROW(parse_config(bad_lang, kData / "configs"), ConfigError);
  auto bad_fraction = mock_doc();
  bad_fraction["filter"]["keep_fraction"] = 0;
  EXPECT_THROW(parse_config(bad_fraction, kData / "configs"), ConfigError);
  auto bad_strategy = mock_doc();
  bad_strategy["strategy"] = "best_guess";
  EXPECT_THROW(parse_config(bad_strategy, kData / "configs"), ConfigError);
  EXPECT_THROW(load_config(kData / "configs/does_not_exist.json"), Error);
}

TEST(Config, SeedOverrideKeepsExplicitSeeds) {
  auto doc = mock_doc();
  doc["seeds"] = {{"judge", 5}};
  auto cfg = parse_config(doc, kData / "configs");
  EXPECT_EQ(cfg.seeds.judge, 5u);
  override_seed(cfg, 99);
  EXPECT_EQ(cfg.seeds.base, 99u);
  EXPECT_EQ(cfg.seeds.judge, 5u);
  EXPECT_EQ(cfg.seeds.filter, derive_seed(99, "filter"));
  // The override is part of the effective configuration.
  EXPECT_NE(cfg.digest(), parse_config(doc, kData / "configs").digest());
  auto same = parse_config(doc, kData / "configs");
  override_seed(same, 99);
  EXPECT_EQ(cfg.digest(), same.digest());
}

TEST(RunLock, SecondHolderFails) {
  testing::TempDir dir;
  {
    pipeline::RunLock lock(dir.path());
    EXPECT_THROW(pipeline::RunLock again(dir.path()), IoError);
  }
  EXPECT_NO_THROW(pipeline::RunLock after(dir.path()));
}

TEST(Synthesize, StageWithoutUpstreamNamesTheArtifact) {
  testing::TempDir dir;
  auto cfg = small_config(dir);
  auto services = pipeline::Services::create(cfg);
  try {
    pipeline::run_synthesize(cfg, services, {"3", false});
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(pipeline::kStage2File), std::string::npos);
  }
  EXPECT_THROW(pipeline::run_synthesize(cfg, services, {"7", false}), ConfigError);
}

TEST(Synthesize, FullRunReconcilesAndResumes) {
  testing::TempDir dir;
  auto cfg = small_config(dir);
  auto services = pipeline::Services::create(cfg);
  auto first = pipeline::run_synthesize(cfg, services, {"all", false});
  EXPECT_EQ(first.stages_run.size(), 4u);
  const auto m = dataset::DatasetManifest::from_json(first.manifest.at("dataset"));
  EXPECT_TRUE(m.reconciles());
  EXPECT_EQ(m.inputs, 16u);  // 8 passages x 2 languages
  const auto sft = cfg.output_dir / pipeline::kSftFile;
  EXPECT_EQ(read_jsonl(sft).size(), m.kept);
  const auto digest = file_sha256(sft);

  auto resumed = pipeline::run_synthesize(cfg, services, {"all", true});
  EXPECT_EQ(resumed.stages_skipped.size(), 4u);
  EXPECT_TRUE(resumed.stages_run.empty());

  auto warm = pipeline::Services::create(cfg);
  pipeline::run_synthesize(cfg, warm, {"all", false});
  EXPECT_EQ(warm.gateway->stats().backend_calls, 0u);
  EXPECT_EQ(file_sha256(sft), digest);
}

TEST(Synthesize, StagesCanRunOneAtATime) {
  testing::TempDir dir;
  auto cfg = small_config(dir, 4);
  auto services = pipeline::Services::create(cfg);
  for (const char* stage : {"1", "2", "3", "4"}) {
    auto r = pipeline::run_synthesize(cfg, services, {stage, false});
    EXPECT_EQ(r.stages_run.size(), 1u) << stage;
  }
  EXPECT_TRUE(std::filesystem::is_regular_file(cfg.output_dir / pipeline::kSftFile));
}

TEST(Bench, ModesAndRoleChecks) {
  testing::TempDir dir;
  auto cfg = small_config(dir);
  auto services = pipeline::Services::create(cfg);
  auto xl = pipeline::run_bench(cfg, services, {"xl", "zero_shot", std::nullopt});
  EXPECT_EQ(xl.items, 6360u);
  EXPECT_EQ(xl.counts.eligible, 795u);
  EXPECT_TRUE(std::filesystem::is_regular_file(xl.path));
  EXPECT_THROW(pipeline::run_bench(cfg, services, {"translated", "rtt", std::nullopt}), ConfigError);
  auto no_mt = cfg;
  no_mt.prompt_translator.reset();
  EXPECT_THROW(pipeline::run_bench(no_mt, services, {"translated", "zero_shot", std::nullopt}), ConfigError);
}

TEST(Eval, RunResumeAndReport) {
  testing::TempDir dir;
  auto cfg = small_config(dir);
  auto services = pipeline::Services::create(cfg);
  auto xl = pipeline::run_bench(cfg, services, {"xl", "zero_shot", std::nullopt});
  auto items = bench::load_benchmark(xl.path);
  items.resize(24);
  const auto small = dir.path() / "small.jsonl";
  bench::write_benchmark(small, items);

  pipeline::EvalOptions opts{small, "mock-candidate", "mock-reference", "", true, false};
  auto r = pipeline::run_eval(cfg, services, opts);
  EXPECT_EQ(r.run_dir.filename(), "mock-candidate__vs__mock-reference");
  EXPECT_EQ(r.outputs_generated, 48u);
  EXPECT_EQ(r.verdicts_judged, 24u);
  ASSERT_TRUE(r.report.rubrics);
  EXPECT_EQ(r.report.rubrics->n_scores, 24u * 4u);
  for (const char* f : {"outputs.jsonl", "verdicts.jsonl", "rubrics.jsonl", "report.csv", "report.md", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::is_regular_file(r.run_dir / f)) << f;
  }
  // An existing run needs --resume.
  EXPECT_THROW(pipeline::run_eval(cfg, services, opts), Error);

  opts.resume = true;
  auto again = pipeline::run_eval(cfg, services, opts);
  EXPECT_EQ(again.outputs_generated, 0u);
  EXPECT_EQ(again.verdicts_judged, 0u);
  EXPECT_EQ(pipeline::load_report(r.run_dir).win_rates.avg, r.report.win_rates.avg);

  items.resize(12);
  bench::write_benchmark(small, items);
  EXPECT_THROW(pipeline::run_eval(cfg, services, opts), Error);

  std::vector<std::filesystem::path> one = {r.run_dir};
  EXPECT_NE(pipeline::run_report(one).find("Avg"), std::string::npos);
  EXPECT_THROW(pipeline::run_eval(cfg, services, {small, "ghost", "mock-reference", "x", false, false}), ConfigError);
}

}  // namespace
}  // namespace xling
