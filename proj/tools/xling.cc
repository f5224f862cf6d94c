// SPDX-License-Identifier: Apache-2.0
//
// xling: synthesize cross-lingual instruction data, build benchmarks, run
// pairwise and rubric evaluations, and print reports.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "xling/config.h"
#include "xling/errors.h"
#include "xling/pipeline.h"

namespace {

struct GlobalFlags {
  std::string config;
  std::string cache_dir;
  std::optional<std::uint64_t> seed;
};

xling::PipelineConfig load(const GlobalFlags& flags) {
  if (flags.config.empty()) throw xling::ConfigError("--config is required for this command");
  auto cfg = xling::load_config(flags.config);
  if (!flags.cache_dir.empty()) cfg.cache_dir = flags.cache_dir;
  if (flags.seed) xling::override_seed(cfg, *flags.seed);
  return cfg;
}

void print_stats(const xling::gateway::GatewayStats& st) {
  fmt::print("backend calls: {}  cache hits: {}  cache misses: {}\n", st.backend_calls, st.cache_hits,
             st.cache_misses);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual instruction data pipeline and evaluation harness"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config, "Pipeline config (JSON)");
  app.add_option("--cache-dir", flags.cache_dir, "Response cache root (overrides the config)");
  app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { flags.seed = s; },
                                         "Base seed (overrides the config)");

  auto* synth = app.add_subcommand("synthesize", "Run pipeline stages 1-4 and export SFT data");
  xling::pipeline::SynthesizeOptions synth_opts;
  synth->add_option("--stage", synth_opts.stage, "1, 2, 3, 4 or all")->default_val("all");
  synth->add_flag("--resume", synth_opts.resume, "Skip stages whose outputs match their inputs");

  auto* bench = app.add_subcommand("bench", "Build an evaluation benchmark");
  xling::pipeline::BenchOptions bench_opts;
  std::string bench_out;
  bench->add_option("--kind", bench_opts.kind, "xl or translated")->default_val("xl");
  bench->add_option("--mode", bench_opts.mode, "zero_shot or rtt")->default_val("zero_shot");
  bench->add_option("--out", bench_out, "Output file");

  auto* evalc = app.add_subcommand("eval", "Judge a candidate model against a reference");
  xling::pipeline::EvalOptions eval_opts;
  std::string bench_path;
  evalc->add_option("--benchmark", bench_path, "Benchmark file")->required();
  evalc->add_option("--candidate", eval_opts.candidate, "Candidate model id")->required();
  evalc->add_option("--reference", eval_opts.reference, "Reference model id")->required();
  evalc->add_option("--run-id", eval_opts.run_id, "Run directory name");
  evalc->add_flag("--rubrics", eval_opts.rubrics, "Also score the four rubric criteria");
  evalc->add_flag("--resume", eval_opts.resume, "Continue an interrupted run");

  auto* report = app.add_subcommand("report", "Print a run report, or the delta between two runs");
  std::vector<std::string> run_dirs;
  std::string report_out;
  report->add_option("runs", run_dirs, "One run directory, or two (delta = second - first)")
      ->required()
      ->expected(1, 2);
  report->add_option("--out", report_out, "Also write the markdown here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      auto cfg = load(flags);
      auto services = xling::pipeline::Services::create(cfg);
      auto result = xling::pipeline::run_synthesize(cfg, services, synth_opts);
      for (const auto& s : result.stages_run) fmt::print("stage {}: done\n", s);
      for (const auto& s : result.stages_skipped) fmt::print("stage {}: up to date, skipped\n", s);
      if (result.manifest.contains("dataset")) {
        const auto& d = result.manifest["dataset"];
        fmt::print("inputs: {}  kept: {}  filtered: {}  item errors: {}\n", d.value("inputs", 0),
                   d.value("kept", 0), d.value("filtered", 0), d.value("item_errors", 0));
      }
      print_stats(result.stats);
      fmt::print("artifacts in {}\n", cfg.output_dir.string());
    } else if (*bench) {
      auto cfg = load(flags);
      auto services = xling::pipeline::Services::create(cfg);
      if (!bench_out.empty()) bench_opts.out = bench_out;
      auto result = xling::pipeline::run_bench(cfg, services, bench_opts);
      fmt::print("total: {}  excluded: {}  eligible: {}  items: {}\n", result.counts.total,
                 result.counts.excluded, result.counts.eligible, result.items);
      if (result.item_errors > 0) fmt::print("item errors: {}\n", result.item_errors);
      fmt::print("wrote {}\n", result.path.string());
    } else if (*evalc) {
      auto cfg = load(flags);
      auto services = xling::pipeline::Services::create(cfg);
      eval_opts.benchmark = bench_path;
      auto result = xling::pipeline::run_eval(cfg, services, eval_opts);
      fmt::print("{}", xling::eval::report_markdown(result.report));
      print_stats(services.gateway->stats());
      fmt::print("run directory: {}\n", result.run_dir.string());
    } else if (*report) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const auto text = xling::pipeline::run_report(dirs);
      fmt::print("{}", text);
      if (!report_out.empty()) xling::write_text_atomic(report_out, text);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "xling: error: {}\n", e.what());
    return 1;
  }
  return 0;
}
