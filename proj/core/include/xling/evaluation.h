// SPDX-License-Identifier: Apache-2.0
//
// Candidate runs over a benchmark, pairwise judging against a reference
// model, 1-5 rubric scoring, and report tables.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xling/benchmark.h"
#include "xling/errors.h"
#include "xling/gateway.h"
#include "xling/jsonl.h"
#include "xling/templates.h"

namespace xling::eval {

struct ModelOutput {
  std::string item_id;
  std::string model_id;
  std::string text;
  gateway::GenerationParams params;
  bool errored = false;
  std::string error;  // set when errored
};

Json to_json(const ModelOutput& output);
ModelOutput output_from_json(const Json& row);

// One output per item, in item order. Failed calls yield errored outputs with
// empty text.
std::vector<ModelOutput> generate_outputs(gateway::Gateway& gateway,
                                          const gateway::ModelEndpoint& model,
                                          std::span<const bench::BenchmarkItem> items,
                                          const gateway::GenerationParams& params,
                                          std::size_t max_in_flight = 8);

enum class Winner { kCandidate, kReference, kTie };
enum class Position { kCandidateFirst, kReferenceFirst };

std::string_view to_string(Winner winner);
std::string_view to_string(Position position);
Winner parse_winner(std::string_view name);
Position parse_position(std::string_view name);

struct JudgeVerdict {
  std::string item_id;
  std::string lang;
  std::optional<Winner> winner;  // empty for a verdict error
  std::string raw_judgment;
  Position position_order = Position::kCandidateFirst;
  std::string error;
  bool is_error() const { return !winner.has_value(); }
};

Json to_json(const JudgeVerdict& verdict);
JudgeVerdict verdict_from_json(const Json& row);

// Exchanges candidate and reference (winner and position).
JudgeVerdict swapped(const JudgeVerdict& verdict);

enum class Preference { kFirst, kSecond, kTie };

// Reads the content after "PREFERENCE:" if present, else the whole text.
// Accepts A, B, TIE, "RESPONSE A", "RESPONSE B" (case-insensitive, trailing
// punctuation ignored).
std::optional<Preference> parse_preference(std::string_view raw);

class PairwiseJudge {
 public:
  // The template needs {instruction}, {output_a} and {output_b}.
  PairwiseJudge(gateway::Gateway& gateway, gateway::ModelEndpoint judge, PromptTemplate tpl,
                gateway::GenerationParams params, std::uint64_t rng_seed);

  Position position_for(std::string_view item_id) const;
  std::string render_prompt(const bench::BenchmarkItem& item, std::string_view first,
                            std::string_view second) const;

  // An errored candidate output loses and an errored reference output (with a
  // valid candidate) wins; neither case calls the judge.
  JudgeVerdict judge(const bench::BenchmarkItem& item, const ModelOutput& candidate,
                     const ModelOutput& reference);

  std::vector<JudgeVerdict> judge_batch(std::span<const bench::BenchmarkItem> items,
                                        std::span<const ModelOutput> candidates,
                                        std::span<const ModelOutput> references,
                                        std::size_t max_in_flight = 8);

 private:
  gateway::Gateway& gateway_;
  gateway::ModelEndpoint judge_;
  PromptTemplate tpl_;
  gateway::GenerationParams params_;
  std::uint64_t rng_seed_;
};

struct WinRateResult {
  std::size_t n_items = 0;  // verdicts with a winner
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  std::size_t verdict_errors = 0;
  double win_rate_pct = 0.0;
};

// 100 * (wins + ties / 2) / n_items. Verdict errors are counted separately.
// Throws PreconditionError when no verdict has a winner.
WinRateResult win_rate(std::span<const JudgeVerdict> verdicts);

enum class Criterion { kPrecision, kInformativeness, kNaturalness, kObjectivity };
inline constexpr std::array<Criterion, 4> kAllCriteria = {
    Criterion::kPrecision, Criterion::kInformativeness, Criterion::kNaturalness,
    Criterion::kObjectivity};

std::string_view to_string(Criterion criterion);
Criterion parse_criterion(std::string_view name);

struct RubricScore {
  std::string item_id;
  std::string lang;
  std::string model_id;
  Criterion criterion = Criterion::kPrecision;
  int score = 0;
  std::string raw_judgment;
};

Json to_json(const RubricScore& score);
RubricScore rubric_score_from_json(const Json& row);

// SCORE: label, integer 1..5.
Expected<int> parse_rubric_score(std::string_view raw);

class RubricJudge {
 public:
  // judge_tpl needs {rubric}, {instruction} and {response}; rubric texts are
  // inserted verbatim. Every criterion needs a rubric.
  RubricJudge(gateway::Gateway& gateway, gateway::ModelEndpoint judge, PromptTemplate judge_tpl,
              std::map<Criterion, PromptTemplate> rubrics, gateway::GenerationParams params);

  // Loads rubric_judge and rubric_<criterion> templates from `dir`.
  static RubricJudge from_dir(gateway::Gateway& gateway, gateway::ModelEndpoint judge,
                              const std::filesystem::path& dir, gateway::GenerationParams params);

  std::string render_prompt(const bench::BenchmarkItem& item, const ModelOutput& output,
                            Criterion criterion) const;
  Expected<RubricScore> score(const bench::BenchmarkItem& item, const ModelOutput& output,
                              Criterion criterion);

  struct Job {
    const bench::BenchmarkItem* item;
    const ModelOutput* output;
    Criterion criterion;
  };
  std::vector<Expected<RubricScore>> score_batch(std::span<const Job> jobs,
                                                 std::size_t max_in_flight = 8);

 private:
  gateway::Gateway& gateway_;
  gateway::ModelEndpoint judge_;
  PromptTemplate judge_tpl_;
  std::map<Criterion, PromptTemplate> rubrics_;
  gateway::GenerationParams params_;
};

// ---- aggregation ----

struct LanguageWinRate {
  std::string lang;
  WinRateResult result;
  bool defined = false;  // false when every verdict for the language errored
};

struct WinRateTable {
  std::vector<LanguageWinRate> rows;  // sorted by language code
  std::optional<double> avg;          // unweighted mean of defined rows
};

WinRateTable aggregate_win_rates(std::span<const JudgeVerdict> verdicts);

struct RubricSummary {
  std::map<std::string, std::map<Criterion, double>> by_model;  // mean per (model, criterion)
  std::map<Criterion, double> by_criterion;                     // macro over models
  std::map<std::string, double> by_model_overall;               // macro over criteria
  std::size_t n_scores = 0;
};

// Mean of the scores. Throws PreconditionError on empty input.
double macro_average(std::span<const int> scores);

// Throws PreconditionError on empty input.
RubricSummary aggregate_rubrics(std::span<const RubricScore> scores);

struct WinRateDelta {
  std::map<std::string, double> by_language;  // other - base, languages defined in both
  std::optional<double> avg;
};

WinRateDelta delta(const WinRateTable& base, const WinRateTable& other);

struct EvalReport {
  std::string run_id;
  std::string candidate;
  std::string reference;
  WinRateTable win_rates;
  std::optional<RubricSummary> rubrics;
};

std::vector<Json> report_rows(const EvalReport& report);
std::string report_csv(const EvalReport& report);
std::string report_markdown(const EvalReport& report);
std::string delta_markdown(const WinRateDelta& delta, std::string_view base_label,
                           std::string_view other_label);

}  // namespace xling::eval
