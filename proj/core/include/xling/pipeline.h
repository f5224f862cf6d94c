// SPDX-License-Identifier: Apache-2.0
//
// Command-level orchestration shared by the CLI and the end-to-end tests.
// Every command writes its artifacts under a directory guarded by a lock file
// and records a manifest with the config digest, seeds and input digests.
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xling/benchmark.h"
#include "xling/cache.h"
#include "xling/config.h"
#include "xling/evaluation.h"
#include "xling/gateway.h"
#include "xling/jsonl.h"
#include "xling/mock_transport.h"

namespace xling::pipeline {

// Holds an exclusive lock file (<dir>/.xling.lock) for its lifetime. Throws
// IoError when another process holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct Services {
  std::shared_ptr<gateway::MockTransport> mock;
  std::shared_ptr<CacheStore> cache;
  std::unique_ptr<gateway::Gateway> gateway;

  // Disk cache at cfg.cache_dir; mock:// URLs go to the built-in backends.
  // `http` replaces the real HTTP transport (tests).
  static Services create(const PipelineConfig& cfg, std::shared_ptr<gateway::Transport> http = nullptr);
};

inline constexpr const char* kStage0File = "stage0_seeds.jsonl";
inline constexpr const char* kStage1File = "stage1_generated.jsonl";
inline constexpr const char* kStage2File = "stage2_refined.jsonl";
inline constexpr const char* kStage3File = "stage3_translated.jsonl";
inline constexpr const char* kStage4File = "stage4_kept.jsonl";
inline constexpr const char* kSftFile = "sft.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

struct SynthesizeOptions {
  std::string stage = "all";  // 1, 2, 3, 4 or all
  bool resume = false;
};

struct SynthesizeResult {
  Json manifest;
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_skipped;  // resumed
  gateway::GatewayStats stats;
};

// Throws ConfigError for a bad stage name or missing role, IoError naming the
// missing upstream artifact.
SynthesizeResult run_synthesize(const PipelineConfig& cfg, Services& services,
                                const SynthesizeOptions& options);

struct BenchOptions {
  std::string kind = "xl";         // xl | translated
  std::string mode = "zero_shot";  // zero_shot | rtt
  // default <output_dir>/bench_xl_<mode>.jsonl or bench_translated.jsonl
  std::optional<std::filesystem::path> out;
};

struct BenchResult {
  std::filesystem::path path;
  bench::PromptCounts counts;
  std::size_t items = 0;
  std::size_t item_errors = 0;
  Json manifest;
};

BenchResult run_bench(const PipelineConfig& cfg, Services& services, const BenchOptions& options);

struct EvalOptions {
  std::filesystem::path benchmark;
  std::string candidate;
  std::string reference;
  std::string run_id;  // default "<candidate>__vs__<reference>"
  bool rubrics = false;
  bool resume = false;
};

struct EvalResult {
  std::filesystem::path run_dir;
  eval::EvalReport report;
  std::size_t outputs_generated = 0;  // this invocation
  std::size_t verdicts_judged = 0;    // this invocation
  Json manifest;
};

// Writes runs/<run_id>/{outputs,verdicts,rubrics,report}.jsonl, report.csv,
// report.md, errors.jsonl and manifest.json. An existing run needs --resume;
// resuming against a different benchmark file is fatal.
EvalResult run_eval(const PipelineConfig& cfg, Services& services, const EvalOptions& options);

// Recomputes the report of a run directory from its stored verdicts and
// rubric scores.
eval::EvalReport load_report(const std::filesystem::path& run_dir);

// Markdown for one run, or the per-language delta (second minus first) for
// two runs.
std::string run_report(std::span<const std::filesystem::path> run_dirs);

}  // namespace xling::pipeline
