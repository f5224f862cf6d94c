// SPDX-License-Identifier: Apache-2.0
#include "xling/evaluation.h"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "xling/concurrency.h"
#include "xling/envelope.h"
#include "xling/rng.h"
#include "xling/unicode.h"

namespace xling::eval {

namespace {

Json params_to_json(const gateway::GenerationParams& p) {
  return {{"temperature", p.temperature}, {"max_tokens", p.max_tokens}, {"stop", p.stop}};
}

gateway::GenerationParams params_from_json(const Json& j) {
  gateway::GenerationParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.stop = j.value("stop", std::vector<std::string>{});
  return p;
}

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_decoration(std::string_view s) {
  auto junk = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == ',' || c == '!' ||
           c == '*' || c == '"' || c == '\'' || c == '`' || c == ':' || c == ';' || c == '(' ||
           c == ')' || c == '[' || c == ']';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && junk(s[b])) ++b;
  while (e > b && junk(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

template <typename Fn>
auto collect_parallel(std::size_t n, std::size_t max_in_flight, Fn fn) {
  using T = decltype(fn(std::size_t{0}));
  std::vector<std::optional<T>> slots(n);
  parallel_for(n, max_in_flight, [&](std::size_t i) { slots[i].emplace(fn(i)); });
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

Json to_json(const ModelOutput& output) {
  Json row = {{"item_id", output.item_id},
              {"model_id", output.model_id},
              {"text", output.text},
              {"params", params_to_json(output.params)},
              {"errored", output.errored}};
  if (output.errored) row["error"] = output.error;
  return row;
}

ModelOutput output_from_json(const Json& row) {
  try {
    ModelOutput out;
    out.item_id = row.at("item_id").get<std::string>();
    out.model_id = row.at("model_id").get<std::string>();
    out.text = row.at("text").get<std::string>();
    if (row.contains("params")) out.params = params_from_json(row.at("params"));
    out.errored = row.value("errored", false);
    out.error = row.value("error", "");
    return out;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed model output: ") + e.what());
  }
}

std::vector<ModelOutput> generate_outputs(gateway::Gateway& gateway,
                                          const gateway::ModelEndpoint& model,
                                          std::span<const bench::BenchmarkItem> items,
                                          const gateway::GenerationParams& params,
                                          std::size_t max_in_flight) {
  std::vector<gateway::ChatRequest> requests;
  requests.reserve(items.size());
  for (const auto& item : items) {
    requests.push_back(gateway::make_user_request(model, item.rendered_prompt, params));
  }
  auto completions = gateway.complete_batch(requests, max_in_flight);
  std::vector<ModelOutput> outputs;
  outputs.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    ModelOutput out{items[i].item_id, model.model_id, "", params, false, ""};
    if (completions[i]) {
      out.text = completions[i]->text;
      if (unicode::trim(out.text).empty()) {
        out.errored = true;
        out.error = "empty output";
      }
    } else {
      out.errored = true;
      out.error = std::string(to_string(completions[i].error().kind)) + ": " +
                  completions[i].error().message;
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

std::string_view to_string(Winner winner) {
  switch (winner) {
    case Winner::kCandidate:
      return "candidate";
    case Winner::kReference:
      return "reference";
    case Winner::kTie:
      return "tie";
  }
  return "tie";
}

std::string_view to_string(Position position) {
  return position == Position::kCandidateFirst ? "candidate_first" : "reference_first";
}

Winner parse_winner(std::string_view name) {
  if (name == "candidate") return Winner::kCandidate;
  if (name == "reference") return Winner::kReference;
  if (name == "tie") return Winner::kTie;
  throw IoError("unknown winner '" + std::string(name) + "'");
}

Position parse_position(std::string_view name) {
  if (name == "candidate_first") return Position::kCandidateFirst;
  if (name == "reference_first") return Position::kReferenceFirst;
  throw IoError("unknown position order '" + std::string(name) + "'");
}

Json to_json(const JudgeVerdict& verdict) {
  Json row = {{"item_id", verdict.item_id},
              {"lang", verdict.lang},
              {"winner", nullptr},
              {"raw_judgment", verdict.raw_judgment},
              {"position_order", to_string(verdict.position_order)}};
  if (verdict.winner) row["winner"] = to_string(*verdict.winner);
  if (!verdict.error.empty()) row["error"] = verdict.error;
  return row;
}

JudgeVerdict verdict_from_json(const Json& row) {
  try {
    JudgeVerdict v;
    v.item_id = row.at("item_id").get<std::string>();
    v.lang = row.value("lang", "");
    if (!row.at("winner").is_null()) v.winner = parse_winner(row.at("winner").get<std::string>());
    v.raw_judgment = row.value("raw_judgment", "");
    v.position_order = parse_position(row.at("position_order").get<std::string>());
    v.error = row.value("error", "");
    return v;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed verdict: ") + e.what());
  }
}

JudgeVerdict swapped(const JudgeVerdict& verdict) {
  JudgeVerdict out = verdict;
  if (out.winner == Winner::kCandidate) {
    out.winner = Winner::kReference;
  } else if (out.winner == Winner::kReference) {
    out.winner = Winner::kCandidate;
  }
  out.position_order = verdict.position_order == Position::kCandidateFirst
                           ? Position::kReferenceFirst
                           : Position::kCandidateFirst;
  return out;
}

std::optional<Preference> parse_preference(std::string_view raw) {
  std::string body;
  if (auto labeled = envelope::extract(raw, "PREFERENCE")) {
    body = *labeled;
  } else {
    body = unicode::trim(raw);
  }
  if (auto nl = body.find('\n'); nl != std::string::npos) body.resize(nl);
  const std::string token = upper_ascii(strip_decoration(body));
  if (token == "A" || token == "RESPONSE A") return Preference::kFirst;
  if (token == "B" || token == "RESPONSE B") return Preference::kSecond;
  if (token == "TIE") return Preference::kTie;
  return std::nullopt;
}

PairwiseJudge::PairwiseJudge(gateway::Gateway& gateway, gateway::ModelEndpoint judge,
                             PromptTemplate tpl, gateway::GenerationParams params,
                             std::uint64_t rng_seed)
    : gateway_(gateway),
      judge_(std::move(judge)),
      tpl_(std::move(tpl)),
      params_(std::move(params)),
      rng_seed_(rng_seed) {
  tpl_.require({"instruction", "output_a", "output_b"});
  judge_.validate();
  params_.validate();
}

Position PairwiseJudge::position_for(std::string_view item_id) const {
  Rng rng(derive_seed(rng_seed_, item_id));
  return rng.coin() ? Position::kCandidateFirst : Position::kReferenceFirst;
}

std::string PairwiseJudge::render_prompt(const bench::BenchmarkItem& item, std::string_view first,
                                         std::string_view second) const {
  return render(tpl_.text, {{"instruction", item.rendered_prompt},
                            {"output_a", std::string(first)},
                            {"output_b", std::string(second)}});
}

JudgeVerdict PairwiseJudge::judge(const bench::BenchmarkItem& item, const ModelOutput& candidate,
                                  const ModelOutput& reference) {
  if (candidate.item_id != item.item_id || reference.item_id != item.item_id) {
    throw PreconditionError("outputs do not belong to item " + item.item_id);
  }
  JudgeVerdict verdict;
  verdict.item_id = item.item_id;
  verdict.lang = item.tgt_lang;
  verdict.position_order = position_for(item.item_id);
  if (candidate.errored) {
    verdict.winner = Winner::kReference;
    return verdict;
  }
  if (reference.errored) {
    verdict.winner = Winner::kCandidate;
    return verdict;
  }
  const bool cand_first = verdict.position_order == Position::kCandidateFirst;
  const auto& first = cand_first ? candidate.text : reference.text;
  const auto& second = cand_first ? reference.text : candidate.text;
  try {
    auto completion =
        gateway_.complete(gateway::make_user_request(judge_, render_prompt(item, first, second), params_));
    verdict.raw_judgment = completion.text;
  } catch (const gateway::GatewayError& e) {
    verdict.error = std::string(to_string(e.kind())) + ": " + e.what();
    return verdict;
  }
  auto pref = parse_preference(verdict.raw_judgment);
  if (!pref) {
    verdict.error = "unparseable judgment";
    return verdict;
  }
  switch (*pref) {
    case Preference::kTie:
      verdict.winner = Winner::kTie;
      break;
    case Preference::kFirst:
      verdict.winner = cand_first ? Winner::kCandidate : Winner::kReference;
      break;
    case Preference::kSecond:
      verdict.winner = cand_first ? Winner::kReference : Winner::kCandidate;
      break;
  }
  return verdict;
}

std::vector<JudgeVerdict> PairwiseJudge::judge_batch(std::span<const bench::BenchmarkItem> items,
                                                     std::span<const ModelOutput> candidates,
                                                     std::span<const ModelOutput> references,
                                                     std::size_t max_in_flight) {
  if (candidates.size() != items.size() || references.size() != items.size()) {
    throw PreconditionError("judge_batch needs one candidate and one reference output per item");
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (candidates[i].item_id != items[i].item_id || references[i].item_id != items[i].item_id) {
      throw PreconditionError("outputs do not belong to item " + items[i].item_id);
    }
  }
  return collect_parallel(items.size(), max_in_flight, [&](std::size_t i) {
    return judge(items[i], candidates[i], references[i]);
  });
}

WinRateResult win_rate(std::span<const JudgeVerdict> verdicts) {
  WinRateResult r;
  for (const auto& v : verdicts) {
    if (!v.winner) {
      ++r.verdict_errors;
      continue;
    }
    switch (*v.winner) {
      case Winner::kCandidate:
        ++r.wins;
        break;
      case Winner::kReference:
        ++r.losses;
        break;
      case Winner::kTie:
        ++r.ties;
        break;
    }
  }
  r.n_items = r.wins + r.losses + r.ties;
  if (r.n_items == 0) throw PreconditionError("win rate is undefined without parsed verdicts");
  r.win_rate_pct = 100.0 * (static_cast<double>(r.wins) + 0.5 * static_cast<double>(r.ties)) /
                   static_cast<double>(r.n_items);
  return r;
}

std::string_view to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::kPrecision:
      return "precision";
    case Criterion::kInformativeness:
      return "informativeness";
    case Criterion::kNaturalness:
      return "naturalness";
    case Criterion::kObjectivity:
      return "objectivity";
  }
  return "precision";
}

Criterion parse_criterion(std::string_view name) {
  for (auto c : kAllCriteria) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown rubric criterion '" + std::string(name) + "'");
}

Json to_json(const RubricScore& score) {
  return {{"item_id", score.item_id},   {"lang", score.lang},
          {"model_id", score.model_id}, {"criterion", to_string(score.criterion)},
          {"score", score.score},       {"raw_judgment", score.raw_judgment}};
}

RubricScore rubric_score_from_json(const Json& row) {
  try {
    RubricScore s;
    s.item_id = row.at("item_id").get<std::string>();
    s.lang = row.value("lang", "");
    s.model_id = row.at("model_id").get<std::string>();
    s.criterion = parse_criterion(row.at("criterion").get<std::string>());
    s.score = row.at("score").get<int>();
    s.raw_judgment = row.value("raw_judgment", "");
    if (s.score < 1 || s.score > 5) throw IoError("stored rubric score out of range");
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed rubric score: ") + e.what());
  }
}

Expected<int> parse_rubric_score(std::string_view raw) {
  auto score = envelope::parse_score(raw);
  if (!score) return ItemError{ItemErrorKind::kExtraction, "no SCORE: label with an integer", 0};
  if (*score < 1 || *score > 5) {
    return ItemError{ItemErrorKind::kProtocol, fmt::format("score {} outside 1..5", *score), 0};
  }
  return *score;
}

RubricJudge::RubricJudge(gateway::Gateway& gateway, gateway::ModelEndpoint judge,
                         PromptTemplate judge_tpl, std::map<Criterion, PromptTemplate> rubrics,
                         gateway::GenerationParams params)
    : gateway_(gateway),
      judge_(std::move(judge)),
      judge_tpl_(std::move(judge_tpl)),
      rubrics_(std::move(rubrics)),
      params_(std::move(params)) {
  judge_tpl_.require({"rubric", "instruction", "response"});
  for (auto c : kAllCriteria) {
    if (!rubrics_.contains(c)) {
      throw ConfigError("missing rubric text for " + std::string(to_string(c)));
    }
  }
  judge_.validate();
  params_.validate();
}

RubricJudge RubricJudge::from_dir(gateway::Gateway& gateway, gateway::ModelEndpoint judge,
                                  const std::filesystem::path& dir,
                                  gateway::GenerationParams params) {
  std::map<Criterion, PromptTemplate> rubrics;
  for (auto c : kAllCriteria) {
    rubrics.emplace(c, load_template(dir, "rubric_" + std::string(to_string(c))));
  }
  return RubricJudge(gateway, std::move(judge), load_template(dir, "rubric_judge"),
                     std::move(rubrics), std::move(params));
}

std::string RubricJudge::render_prompt(const bench::BenchmarkItem& item, const ModelOutput& output,
                                       Criterion criterion) const {
  return render(judge_tpl_.text, {{"rubric", std::string(unicode::trim(rubrics_.at(criterion).text))},
                                  {"instruction", item.rendered_prompt},
                                  {"response", output.text}});
}

Expected<RubricScore> RubricJudge::score(const bench::BenchmarkItem& item,
                                         const ModelOutput& output, Criterion criterion) {
  if (output.item_id != item.item_id) {
    return ItemError{ItemErrorKind::kPrecondition, "output does not belong to item " + item.item_id, 0};
  }
  if (output.errored) {
    return ItemError{ItemErrorKind::kPrecondition, "output errored: " + output.error, 0};
  }
  RubricScore s{item.item_id, item.tgt_lang, output.model_id, criterion, 0, ""};
  try {
    s.raw_judgment =
        gateway_.complete(gateway::make_user_request(judge_, render_prompt(item, output, criterion), params_))
            .text;
  } catch (const gateway::GatewayError& e) {
    return e.to_item_error();
  }
  auto parsed = parse_rubric_score(s.raw_judgment);
  if (!parsed) return parsed.error();
  s.score = *parsed;
  return s;
}

std::vector<Expected<RubricScore>> RubricJudge::score_batch(std::span<const Job> jobs,
                                                            std::size_t max_in_flight) {
  return collect_parallel(jobs.size(), max_in_flight, [&](std::size_t i) {
    return score(*jobs[i].item, *jobs[i].output, jobs[i].criterion);
  });
}

WinRateTable aggregate_win_rates(std::span<const JudgeVerdict> verdicts) {
  std::map<std::string, std::vector<JudgeVerdict>> by_lang;
  for (const auto& v : verdicts) by_lang[v.lang].push_back(v);
  WinRateTable table;
  double sum = 0.0;
  std::size_t defined = 0;
  for (auto& [lang, group] : by_lang) {
    LanguageWinRate row;
    row.lang = lang;
    if (std::any_of(group.begin(), group.end(), [](const JudgeVerdict& v) { return !v.is_error(); })) {
      row.result = win_rate(group);
      row.defined = true;
      sum += row.result.win_rate_pct;
      ++defined;
    } else {
      row.result.verdict_errors = group.size();
    }
    table.rows.push_back(std::move(row));
  }
  if (defined > 0) table.avg = sum / static_cast<double>(defined);
  return table;
}

double macro_average(std::span<const int> scores) {
  if (scores.empty()) throw PreconditionError("macro average of no scores");
  const double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
  return sum / static_cast<double>(scores.size());
}

RubricSummary aggregate_rubrics(std::span<const RubricScore> scores) {
  if (scores.empty()) throw PreconditionError("no rubric scores to aggregate");
  std::map<std::string, std::map<Criterion, std::vector<int>>> grouped;
  for (const auto& s : scores) grouped[s.model_id][s.criterion].push_back(s.score);

  RubricSummary summary;
  summary.n_scores = scores.size();
  std::map<Criterion, std::vector<double>> criterion_means;
  for (const auto& [model, per_criterion] : grouped) {
    double model_sum = 0.0;
    for (const auto& [criterion, values] : per_criterion) {
      const double mean = macro_average(values);
      summary.by_model[model][criterion] = mean;
      criterion_means[criterion].push_back(mean);
      model_sum += mean;
    }
    summary.by_model_overall[model] = model_sum / static_cast<double>(per_criterion.size());
  }
  for (const auto& [criterion, means] : criterion_means) {
    summary.by_criterion[criterion] =
        std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  }
  return summary;
}

WinRateDelta delta(const WinRateTable& base, const WinRateTable& other) {
  std::map<std::string, double> base_rates;
  for (const auto& row : base.rows) {
    if (row.defined) base_rates[row.lang] = row.result.win_rate_pct;
  }
  WinRateDelta d;
  for (const auto& row : other.rows) {
    auto it = base_rates.find(row.lang);
    if (row.defined && it != base_rates.end()) {
      d.by_language[row.lang] = row.result.win_rate_pct - it->second;
    }
  }
  if (base.avg && other.avg) d.avg = *other.avg - *base.avg;
  return d;
}

std::vector<Json> report_rows(const EvalReport& report) {
  std::vector<Json> rows;
  for (const auto& row : report.win_rates.rows) {
    Json j = {{"type", "win_rate"},
              {"run_id", report.run_id},
              {"candidate", report.candidate},
              {"reference", report.reference},
              {"lang", row.lang},
              {"n_items", row.result.n_items},
              {"wins", row.result.wins},
              {"losses", row.result.losses},
              {"ties", row.result.ties},
              {"verdict_errors", row.result.verdict_errors},
              {"win_rate_pct", nullptr}};
    if (row.defined) j["win_rate_pct"] = row.result.win_rate_pct;
    rows.push_back(std::move(j));
  }
  Json avg = {{"type", "win_rate_avg"}, {"run_id", report.run_id}, {"candidate", report.candidate},
              {"reference", report.reference}, {"win_rate_pct", nullptr}};
  if (report.win_rates.avg) avg["win_rate_pct"] = *report.win_rates.avg;
  rows.push_back(std::move(avg));
  if (report.rubrics) {
    for (const auto& [model, per_criterion] : report.rubrics->by_model) {
      for (const auto& [criterion, mean] : per_criterion) {
        rows.push_back({{"type", "rubric"},
                        {"run_id", report.run_id},
                        {"model_id", model},
                        {"criterion", to_string(criterion)},
                        {"mean_score", mean}});
      }
    }
    for (const auto& [criterion, mean] : report.rubrics->by_criterion) {
      rows.push_back({{"type", "rubric_macro"},
                      {"run_id", report.run_id},
                      {"criterion", to_string(criterion)},
                      {"mean_score", mean}});
    }
  }
  return rows;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "section,model,key,n_items,wins,losses,ties,verdict_errors,value\n";
  for (const auto& row : report.win_rates.rows) {
    out += fmt::format("win_rate,{},{},{},{},{},{},{},{}\n", report.candidate, row.lang,
                       row.result.n_items, row.result.wins, row.result.losses, row.result.ties,
                       row.result.verdict_errors,
                       row.defined ? fmt::format("{:.4f}", row.result.win_rate_pct) : "");
  }
  out += fmt::format("win_rate,{},avg,,,,,,{}\n", report.candidate,
                     report.win_rates.avg ? fmt::format("{:.4f}", *report.win_rates.avg) : "");
  if (report.rubrics) {
    for (const auto& [model, per_criterion] : report.rubrics->by_model) {
      for (const auto& [criterion, mean] : per_criterion) {
        out += fmt::format("rubric,{},{},,,,,,{:.4f}\n", model, to_string(criterion), mean);
      }
    }
  }
  return out;
}

std::string report_markdown(const EvalReport& report) {
  std::string out = fmt::format("# Run {}\n\nCandidate `{}` against reference `{}`.\n\n", report.run_id,
                                report.candidate, report.reference);
  out += "## Win rate (%)\n\n| Model | Avg |";
  for (const auto& row : report.win_rates.rows) out += fmt::format(" {} |", row.lang);
  out += "\n|---|---|";
  for (std::size_t i = 0; i < report.win_rates.rows.size(); ++i) out += "---|";
  out += fmt::format("\n| {} | {} |", report.candidate,
                     report.win_rates.avg ? fmt::format("{:.1f}", *report.win_rates.avg) : "-");
  for (const auto& row : report.win_rates.rows) {
    out += row.defined ? fmt::format(" {:.1f} |", row.result.win_rate_pct) : " - |";
  }
  out += "\n";
  std::size_t errors = 0;
  for (const auto& row : report.win_rates.rows) errors += row.result.verdict_errors;
  if (errors > 0) out += fmt::format("\nUnparseable or failed judgments excluded: {}\n", errors);

  if (report.rubrics) {
    out += "\n## Rubric scores (1-5)\n\n| Model |";
    for (auto c : kAllCriteria) out += fmt::format(" {} |", to_string(c));
    out += " Avg |\n|---|---|---|---|---|---|\n";
    for (const auto& [model, per_criterion] : report.rubrics->by_model) {
      out += fmt::format("| {} |", model);
      for (auto c : kAllCriteria) {
        auto it = per_criterion.find(c);
        out += it == per_criterion.end() ? " - |" : fmt::format(" {:.2f} |", it->second);
      }
      out += fmt::format(" {:.2f} |\n", report.rubrics->by_model_overall.at(model));
    }
  }
  return out;
}

std::string delta_markdown(const WinRateDelta& d, std::string_view base_label,
                           std::string_view other_label) {
  std::string out = fmt::format("# {} minus {}\n\n| Avg |", other_label, base_label);
  for (const auto& [lang, _] : d.by_language) out += fmt::format(" {} |", lang);
  out += "\n|---|";
  for (std::size_t i = 0; i < d.by_language.size(); ++i) out += "---|";
  out += fmt::format("\n| {} |", d.avg ? fmt::format("{:+.1f}", *d.avg) : "-");
  for (const auto& [_, value] : d.by_language) out += fmt::format(" {:+.1f} |", value);
  out += "\n";
  return out;
}

}  // namespace xling::eval
