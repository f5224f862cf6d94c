// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "test_support.h"
#include "xling/benchmark.h"
#include "xling/dataset.h"
#include "xling/digest.h"
#include "xling/evaluation.h"
#include "xling/languages.h"
#include "xling/mock_transport.h"
#include "xling/rng.h"
#include "xling/segment.h"
#include "xling/translation.h"

namespace {

using namespace xling;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kData = XLING_TEST_DATA_DIR;
const std::string kCli = XLING_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- 1. filtering law ----
Outcome filtering_law() {
  Rng rng(40000);
  std::vector<dataset::ScoredItem> items;
  const std::vector<std::string> langs = {"deu", "por", "hun", "lit", "gle", "mlt", "zho", "hin"};
  for (int i = 0; i < 40000; ++i) {
    items.push_back({"item-" + std::to_string(i), langs[i % 8], rng.unit()});
  }
  dataset::FilterConfig cfg{0.8, dataset::FilterScope::kGlobal, dataset::FilterSelection::kTopQe, 0};
  const auto start = Clock::now();
  const auto kept = dataset::filter_top(items, cfg);
  const double elapsed = seconds_since(start);
  std::vector<bool> is_kept(items.size(), false);
  for (auto k : kept) is_kept[k] = true;
  double min_kept = 2.0, max_dropped = -1.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (is_kept[i]) min_kept = std::min(min_kept, items[i].passage_qe);
    else max_dropped = std::max(max_dropped, items[i].passage_qe);
  }
  const bool ok = kept.size() == 32000 && min_kept >= max_dropped && elapsed < 5.0;
  return {ok, fmt::format("kept={} min_kept={:.6f} max_dropped={:.6f} time={:.3f}s", kept.size(), min_kept,
                          max_dropped, elapsed)};
}

// ---- 2. best-of-k dominance ----
double injective_score(std::string_view mt) {
  return static_cast<double>(fnv1a64(mt) >> 11) * 0x1.0p-53;
}

Outcome best_of_k_dominance() {
  auto transport = std::make_shared<testing::ScriptedTransport>([](const std::string& url, const Json& body) {
    if (url.rfind("qe://", 0) == 0 || url.find("/qe") != std::string::npos) {
      Json scores = Json::array();
      for (const auto& row : body) scores.push_back(injective_score(row.at("mt").get<std::string>()));
      return gateway::HttpResponse{200, scores.dump(), false, ""};
    }
    const auto prompt = testing::last_user_content(body);
    const auto text = prompt.substr(prompt.find("\n\n") + 2);
    const auto variant = url.substr(url.find("/mt-") + 4, 1);
    return testing::chat_ok(text + " <" + variant + std::to_string(fnv1a64(variant + text) % 1000) + ">");
  });
  gateway::Gateway gw(transport, std::make_shared<MemoryCache>());
  qe::QeScorer scorer(gw, "injective", "http://scorer/qe");
  translation::Translator translator(gw, scorer, {"translate", "t", "{src} to {tgt}\n\n{text}"}, {0.0, 256, {}});
  std::vector<gateway::ModelEndpoint> backends;
  for (const char* v : {"a", "b", "c"}) {
    backends.push_back(testing::endpoint(std::string("mt-") + v, std::string("http://mt/mt-") + v,
                                         gateway::Role::kTranslator));
  }
  const auto best = translation::SelectionStrategy::best_of_k(backends);
  const auto naive = translation::SelectionStrategy::naive(backends[0]);

  Rng rng(1000);
  std::size_t violations = 0, strict_expected = 0;
  double sum_best = 0, sum_naive = 0;
  const std::vector<std::string> words = {"river", "stone", "light", "market", "winter", "garden", "signal", "copper"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::string response;
    const auto n_sentences = 1 + rng.below(4);
    for (std::uint64_t s = 0; s < n_sentences; ++s) {
      if (s) response += rng.coin() ? " " : "\n- ";
      std::string sentence = "Trial " + std::to_string(trial);
      for (int w = 0; w < 4; ++w) sentence += " " + words[rng.below(words.size())];
      response += sentence + ".";
    }
    auto b = translator.translate_response(response, "eng", "deu", best);
    auto v = translator.translate_response(response, "eng", "deu", naive);
    if (!b || !v) {
      ++violations;
      continue;
    }
    const auto sentences = translator.segmenter().segment(response).sentences();
    bool differs = false;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::vector<double> scores;
      for (const char* variant : {"a", "b", "c"}) {
        const std::string mt = sentences[i] + " <" + variant +
                               std::to_string(fnv1a64(std::string(variant) + sentences[i]) % 1000) + ">";
        scores.push_back(injective_score(mt));
      }
      std::set<double> distinct(scores.begin(), scores.end());
      const double top = *distinct.rbegin();
      // The selection must be the strict maximum of an injective score set.
      if (distinct.size() != 3 || b->sentence_scores[i] != top) ++violations;
      if (v->sentence_scores[i] != scores[0]) ++violations;
      differs |= scores[0] != top;
    }
    if (b->passage_qe < v->passage_qe) ++violations;
    if (differs) {
      ++strict_expected;
      if (!(b->passage_qe > v->passage_qe)) ++violations;
    }
    sum_best += b->passage_qe;
    sum_naive += v->passage_qe;
  }
  const double mean_best = sum_best / 1000.0, mean_naive = sum_naive / 1000.0;
  const bool ok = violations == 0 && mean_best > mean_naive;
  return {ok, fmt::format("trials=1000 violations={} strict_trials={} mean_best={:.4f} mean_naive={:.4f}", violations,
                          strict_expected, mean_best, mean_naive)};
}

// ---- 3. formatting round-trip ----
std::string random_document(Rng& rng) {
  static const std::vector<std::string> sentences = {
      "The bridge opened in 1932.", "Dr. Ruiz disagreed, e.g. on cost.", "Why does ice float?", "Stir well!",
      "Der Fluss ist lang.", "Čeština má háčky.", "这是一个句子。", "यह एक वाक्य है।", "Это предложение.",
      "هذه جملة.", "Version 2.5 fixed it.", "\"Quoted,\" she said. Then left."};
  static const std::vector<std::string> bullets = {"- ", "* ", "+ ", "• ", "1. ", "2) ", "10. "};
  std::string doc;
  const auto blocks = 1 + rng.below(6);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    switch (rng.below(4)) {
      case 0: {  // paragraph
        const auto n = 1 + rng.below(4);
        for (std::uint64_t i = 0; i < n; ++i) doc += (i ? " " : "") + sentences[rng.below(sentences.size())];
        break;
      }
      case 1: {  // bullet list
        const auto n = 1 + rng.below(4);
        const auto& marker = bullets[rng.below(bullets.size())];
        for (std::uint64_t i = 0; i < n; ++i) {
          doc += (i ? "\n" : "") + std::string(rng.coin() ? "" : "  ") + marker + sentences[rng.below(sentences.size())];
        }
        break;
      }
      case 2:
        doc += "## " + sentences[rng.below(sentences.size())];
        break;
      default:
        doc += "> " + sentences[rng.below(sentences.size())];
        break;
    }
    doc += rng.coin() ? "\n\n" : "\n";
    if (rng.below(5) == 0) doc += "   \n";
  }
  if (rng.coin()) doc.pop_back();
  return doc;
}

Outcome formatting_round_trip() {
  Rng rng(200);
  translation::RuleSegmenter segmenter;
  std::size_t failures = 0, sentences_total = 0, separators_total = 0;
  for (int d = 0; d < 200; ++d) {
    const auto doc = random_document(rng);
    const auto seg = segmenter.segment(doc);
    if (seg.join() != doc) ++failures;
    if (translation::reconstruct(seg, seg.sentences()) != doc) ++failures;
    std::vector<std::string> translated;
    for (const auto& s : seg.sentences()) translated.push_back(gateway::MockTransport::translate("a", s));
    const auto rebuilt = translation::reconstruct(seg, translated);
    // Walk the rebuilt text: separators must sit verbatim between translations.
    std::size_t pos = 0, next = 0, seps = 0;
    bool aligned = true;
    for (const auto& s : seg.segments) {
      const auto& piece = s.kind == translation::SegmentKind::kSeparator ? s.text : translated[next++];
      if (rebuilt.compare(pos, piece.size(), piece) != 0) aligned = false;
      pos += piece.size();
      seps += s.kind == translation::SegmentKind::kSeparator;
    }
    if (!aligned || pos != rebuilt.size() || seps != seg.separators().size()) ++failures;
    sentences_total += seg.sentence_count();
    separators_total += seps;
  }
  return {failures == 0, fmt::format("documents=200 sentences={} separators={} failures={}", sentences_total,
                                     separators_total, failures)};
}

// ---- 4. benchmark counts ----
Outcome benchmark_counts() {
  auto prompts = bench::load_base_prompts(kData / "benchmark/base_prompts.jsonl");
  const auto exclusions = bench::load_exclusions(kData / "benchmark/exclusions.jsonl");
  const auto catalog = DirectiveCatalog::load(kData / "benchmark/directive_templates.v1.json");
  const auto counts = bench::apply_exclusions(prompts, exclusions);
  const std::vector<std::string> langs(languages::kBenchmarkLanguages.begin(), languages::kBenchmarkLanguages.end());
  const auto a = bench::build_xl_benchmark(prompts, langs, catalog, 20250101);
  const auto b = bench::build_xl_benchmark(prompts, langs, catalog, 20250101);
  bool same = a.size() == b.size();
  std::size_t missing_name = 0;
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].template_id == b[i].template_id && a[i].rendered_prompt == b[i].rendered_prompt;
    const auto name = languages::require_display_name(a[i].tgt_lang);
    if (a[i].rendered_prompt.find(name) == std::string::npos) ++missing_name;
  }
  const bool ok = counts.total == 805 && counts.excluded == 10 && counts.eligible == 795 &&
                  a.size() == counts.eligible * 8 && same && missing_name == 0;
  return {ok, fmt::format("total={} excluded={} eligible={} items={} reproducible={} missing_language_name={}",
                          counts.total, counts.excluded, counts.eligible, a.size(), same, missing_name)};
}

// ---- 5. win-rate arithmetic ----
struct ScriptedJudge {
  // The judge prefers the response tagged WIN; equal tags tie; "???" is
  // unparseable.
  std::shared_ptr<testing::ScriptedTransport> transport = std::make_shared<testing::ScriptedTransport>(
      [](const std::string&, const Json& body) {
        const auto p = testing::last_user_content(body);
        const auto a = p.substr(p.find("<response_a>") + 12, 3);
        const auto b = p.substr(p.find("<response_b>") + 12, 3);
        if (a == "???" || b == "???") return testing::chat_ok("I cannot decide.");
        if (a == b) return testing::chat_ok("PREFERENCE: TIE");
        return testing::chat_ok(a == "WIN" ? "PREFERENCE: A" : "PREFERENCE: B");
      });
  gateway::Gateway gw{transport, nullptr};
  eval::PairwiseJudge judge{gw, testing::endpoint("judge"),
                            PromptTemplate{"judge", "t",
                                           "<request>{instruction}</request>\n<response_a>{output_a}</response_a>\n"
                                           "<response_b>{output_b}</response_b>"},
                            {0.0, 64, {}}, 77};

  // outcome per item: 'W', 'L', 'T' or 'U' (unparseable)
  std::vector<eval::JudgeVerdict> run(const std::string& outcomes, bool swap) {
    std::vector<bench::BenchmarkItem> items;
    std::vector<eval::ModelOutput> cand, ref;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto id = "xl-" + std::to_string(i) + "-deu";
      items.push_back({id, static_cast<int>(i), "b", "prompt " + std::to_string(i), "deu", "respond",
                       bench::Mode::kZeroShot, bench::Kind::kCrossLingual});
      std::string c = "LOS", r = "LOS";
      switch (outcomes[i]) {
        case 'W': c = "WIN"; break;
        case 'L': r = "WIN"; break;
        case 'T': c = r = "TIE"; break;
        default: c = "???"; break;
      }
      c += " candidate text";
      r += " reference text";
      if (swap) std::swap(c, r);
      cand.push_back({id, "cand", c, {}, false, ""});
      ref.push_back({id, "ref", r, {}, false, ""});
    }
    return judge.judge_batch(items, cand, ref, 4);
  }
};

Outcome win_rate_arithmetic() {
  ScriptedJudge sj;
  std::vector<std::string> problems;
  const auto mixed = eval::win_rate(sj.run("WWWLT", false));
  if (mixed.win_rate_pct != 70.0) problems.push_back(fmt::format("3W1L1T={}", mixed.win_rate_pct));
  const auto ties = eval::win_rate(sj.run("TTTT", false));
  if (ties.win_rate_pct != 50.0) problems.push_back(fmt::format("all-tie={}", ties.win_rate_pct));
  const auto with_errors = eval::win_rate(sj.run("WWWLTUU", false));
  if (with_errors.n_items != 5 || with_errors.verdict_errors != 2 || with_errors.win_rate_pct != 70.0) {
    problems.push_back("unparseable judgments not excluded");
  }
  Rng rng(100);
  std::size_t asym = 0;
  for (int draw = 0; draw < 100; ++draw) {
    std::string outcomes;
    const auto n = 1 + rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) outcomes += "WLT"[rng.below(3)];
    const auto a = eval::win_rate(sj.run(outcomes, false));
    const auto b = eval::win_rate(sj.run(outcomes, true));
    // Exact in rational terms: 100(2l + t)/2n == 100 - 100(2w + t)/2n iff the
    // counts mirror. The doubles themselves may differ in the last place.
    const bool mirrored = b.n_items == a.n_items && b.wins == a.losses && b.losses == a.wins && b.ties == a.ties;
    if (!mirrored || std::abs(b.win_rate_pct - (100.0 - a.win_rate_pct)) > 1e-9) ++asym;
  }
  if (asym) problems.push_back(fmt::format("antisymmetry violations={}", asym));
  std::string detail = fmt::format("3W1L1T={:.1f} all-tie={:.1f} errors_excluded={} swap_draws=100", mixed.win_rate_pct,
                                   ties.win_rate_pct, with_errors.verdict_errors);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// ---- 6. rubric pipeline ----
Outcome rubric_pipeline() {
  auto transport = std::make_shared<testing::ScriptedTransport>([](const std::string&, const Json& body) {
    const auto p = testing::last_user_content(body);
    if (p.find("OUT-OF-RANGE") != std::string::npos) return testing::chat_ok("SCORE: 7");
    return testing::chat_ok("Reasoning.\nSCORE: " + std::to_string(1 + fnv1a64(p) % 5));
  });
  gateway::Gateway gw(transport, nullptr);
  auto judge = eval::RubricJudge::from_dir(gw, testing::endpoint("judge"), kData / "prompts", {0.0, 64, {}});
  std::vector<bench::BenchmarkItem> items;
  std::vector<eval::ModelOutput> outputs;
  for (int i = 0; i < 10; ++i) {
    const auto id = "xl-" + std::to_string(i) + "-por";
    items.push_back({id, i, "b", "prompt " + std::to_string(i), "por", "respond", bench::Mode::kZeroShot,
                     bench::Kind::kCrossLingual});
    outputs.push_back({id, "cand", "resposta " + std::to_string(i), {}, false, ""});
  }
  std::vector<eval::RubricJudge::Job> jobs;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (auto c : eval::kAllCriteria) jobs.push_back({&items[i], &outputs[i], c});
  }
  const auto results = judge.score_batch(jobs, 4);
  std::vector<eval::RubricScore> scores;
  std::size_t bad = 0;
  for (const auto& r : results) {
    if (!r || r->score < 1 || r->score > 5) ++bad;
    else scores.push_back(*r);
  }
  const auto summary = eval::aggregate_rubrics(scores);
  const bool all_criteria = summary.by_criterion.size() == 4;
  const std::vector<int> pair = {2, 4};
  const double macro = eval::macro_average(pair);
  eval::ModelOutput oor{items[0].item_id, "cand", "OUT-OF-RANGE", {}, false, ""};
  const auto rejected = judge.score(items[0], oor, eval::Criterion::kPrecision);
  const bool out_of_range_rejected = !rejected && !eval::parse_rubric_score("SCORE: 0") && !eval::parse_rubric_score("SCORE: 6");
  const bool ok = bad == 0 && scores.size() == 40 && all_criteria && macro == 3.0 && out_of_range_rejected;
  return {ok, fmt::format("scores={} invalid={} criteria={} macro(2,4)={:.1f} out_of_range_rejected={}", scores.size(),
                          bad, summary.by_criterion.size(), macro, out_of_range_rejected)};
}

// ---- 7 and 8. CLI smoke run and warm rerun ----
struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run_cli(const fs::path& cwd, const std::string& args) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" + kCli + "' --config '" +
                          (kData / "configs/mock.json").string() + "' " + args + " 2>&1";
  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int rc = ::pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

long backend_calls(const std::string& cli_output) {
  const auto at = cli_output.rfind("backend calls: ");
  if (at == std::string::npos) return -1;
  return std::stol(cli_output.substr(at + 15));
}

std::string file_or_empty(const fs::path& p) { return fs::is_regular_file(p) ? read_text(p) : std::string(); }

Outcome end_to_end_smoke(const fs::path& work) {
  const auto start = Clock::now();
  const auto r = run_cli(work, "synthesize --stage all");
  const double elapsed = seconds_since(start);
  if (r.status != 0) return {false, "synthesize exited " + std::to_string(r.status) + ": " + r.out};
  const auto manifest = Json::parse(read_text(work / "xling-out/manifest.json"));
  const auto m = dataset::DatasetManifest::from_json(manifest.at("dataset"));
  const auto catalog = DirectiveCatalog::load(kData / "benchmark/directive_templates.v1.json");
  const auto rows = read_jsonl(work / "xling-out/sft.jsonl");
  const std::size_t passages = manifest.at("sampling").value("sampled", std::size_t{0});
  std::size_t bad_directive = 0;
  for (const auto& row : rows) {
    const auto instruction = row.at("instruction").get<std::string>();
    const auto name = std::string(languages::require_display_name(row.at("tgt_lang").get<std::string>()));
    const auto directive = catalog.find(row.at("template_id").get<std::string>()).render(name);
    const bool ends_with_directive = instruction.size() > directive.size() &&
                                     instruction.ends_with("\n" + directive);
    if (!ends_with_directive || languages::count_occurrences(instruction, name) != 1 ||
        languages::count_occurrences(instruction, "\n") != 1) {
      ++bad_directive;
    }
  }
  const bool ok = passages == 50 && m.reconciles() && m.inputs == 400 && rows.size() == m.kept && !rows.empty() &&
                  bad_directive == 0 && elapsed < 60.0;
  return {ok, fmt::format("passages={} inputs={} kept={} filtered={} errors={} records={} bad_directives={} time={:.2f}s",
                          passages, m.inputs, m.kept, m.filtered, m.item_errors, rows.size(), bad_directive, elapsed)};
}

Outcome determinism_and_caching(const fs::path& work) {
  const auto sft_before = file_or_empty(work / "xling-out/sft.jsonl");
  const auto stage3_before = file_or_empty(work / "xling-out/stage3_translated.jsonl");
  if (sft_before.empty()) return {false, "no export from the smoke run"};
  const auto rerun = run_cli(work, "synthesize --stage all");
  const long synth_calls = backend_calls(rerun.out);
  const bool sft_same = file_or_empty(work / "xling-out/sft.jsonl") == sft_before &&
                        file_or_empty(work / "xling-out/stage3_translated.jsonl") == stage3_before;

  // One eval run over a slice of the cross-lingual benchmark, then the same
  // run again from scratch against the warm cache.
  const auto bench = run_cli(work, "bench --kind xl --mode zero_shot");
  if (bench.status != 0) return {false, "bench failed: " + bench.out};
  auto items = bench::load_benchmark(work / "xling-out/bench_xl_zero_shot.jsonl");
  items.resize(400);
  bench::write_benchmark(work / "slice.jsonl", items);
  const std::string eval_args =
      "eval --benchmark slice.jsonl --candidate mock-candidate --reference mock-reference --rubrics --run-id accept";
  const auto cold = run_cli(work, eval_args);
  if (cold.status != 0) return {false, "eval failed: " + cold.out};
  const auto run_dir = work / "xling-runs/accept";
  std::map<std::string, std::string> before;
  for (const char* f : {"report.csv", "report.md", "report.jsonl", "verdicts.jsonl", "outputs.jsonl", "rubrics.jsonl"}) {
    before[f] = file_or_empty(run_dir / f);
  }
  fs::remove_all(run_dir);
  const auto warm = run_cli(work, eval_args);
  const long eval_calls = backend_calls(warm.out);
  bool reports_same = warm.status == 0;
  for (const auto& [f, content] : before) reports_same &= !content.empty() && file_or_empty(run_dir / f) == content;
  const bool ok = rerun.status == 0 && sft_same && synth_calls == 0 && reports_same && eval_calls == 0 &&
                  backend_calls(cold.out) > 0;
  return {ok, fmt::format("export_identical={} synth_backend_calls={} reports_identical={} eval_backend_calls={} "
                          "cold_eval_backend_calls={}",
                          sft_same, synth_calls, reports_same, eval_calls, backend_calls(cold.out))};
}

}  // namespace

int main() {
  testing::TempDir work;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"filtering_law", filtering_law},
      {"best_of_k_dominance", best_of_k_dominance},
      {"formatting_round_trip", formatting_round_trip},
      {"benchmark_counts", benchmark_counts},
      {"win_rate_arithmetic", win_rate_arithmetic},
      {"rubric_pipeline", rubric_pipeline},
      {"end_to_end_smoke", [&] { return end_to_end_smoke(work.path()); }},
      {"determinism_and_caching", [&] { return determinism_and_caching(work.path()); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
