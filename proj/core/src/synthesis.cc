// SPDX-License-Identifier: Apache-2.0
#include "xling/synthesis.h"

#include <set>
#include <type_traits>

#include "xling/envelope.h"

namespace xling::synthesis {

std::string_view to_string(Stage stage) {
  return stage == Stage::kGenerated ? "generated" : "refined";
}

Stage parse_stage(std::string_view name) {
  if (name == "generated") return Stage::kGenerated;
  if (name == "refined") return Stage::kRefined;
  throw IoError("unknown QA pair stage '" + std::string(name) + "'");
}

Json to_json(const QAPair& pair) {
  Json row = {{"id", pair.id},
              {"instruction", pair.instruction},
              {"response", pair.response},
              {"stage", to_string(pair.stage)},
              {"teacher_model", pair.teacher_model}};
  if (pair.original) {
    row["original"] = {{"instruction", pair.original->first}, {"response", pair.original->second}};
  }
  return row;
}

QAPair qa_pair_from_json(const Json& row) {
  try {
    QAPair pair;
    pair.id = row.at("id").get<std::string>();
    pair.instruction = row.at("instruction").get<std::string>();
    pair.response = row.at("response").get<std::string>();
    pair.stage = parse_stage(row.at("stage").get<std::string>());
    pair.teacher_model = row.value("teacher_model", "");
    if (auto it = row.find("original"); it != row.end() && it->is_object()) {
      pair.original.emplace(it->at("instruction").get<std::string>(),
                            it->at("response").get<std::string>());
    }
    return pair;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed QA pair record: ") + e.what());
  }
}

std::string render_criteria() {
  std::string out;
  int n = 1;
  for (const auto& c : kRefinementCriteria) {
    out += std::to_string(n++) + ". " + std::string(c.name) + ": " + std::string(c.definition) + "\n";
  }
  out.pop_back();
  return out;
}

Synthesizer::Synthesizer(gateway::Gateway& gateway, gateway::ModelEndpoint teacher,
                         gateway::GenerationParams params, PromptTemplate reverse_template,
                         PromptTemplate refine_template)
    : gateway_(gateway),
      teacher_(std::move(teacher)),
      params_(std::move(params)),
      reverse_(std::move(reverse_template)),
      refine_(std::move(refine_template)) {
  reverse_.require({"passage"});
  refine_.require({"criteria", "grounding", "question", "response"});
}

std::string Synthesizer::render_reverse_prompt(const corpus::SeedPassage& passage) const {
  return render(reverse_.text, {{"passage", passage.text}});
}

std::string Synthesizer::render_refine_prompt(const QAPair& pair) const {
  return render(refine_.text, {{"criteria", render_criteria()},
                               {"grounding", std::string(kGroundingInstruction)},
                               {"question", pair.instruction},
                               {"response", pair.response}});
}

Expected<QAPair> Synthesizer::parse_reverse(const corpus::SeedPassage& passage,
                                            std::string_view completion) const {
  auto instruction = envelope::extract(completion, "INSTRUCTION");
  if (!instruction) {
    return ItemError{ItemErrorKind::kExtraction, "no INSTRUCTION: envelope in teacher output", 0};
  }
  QAPair pair;
  pair.id = passage.id;
  pair.instruction = std::move(*instruction);
  pair.response = passage.text;
  pair.stage = Stage::kGenerated;
  pair.teacher_model = teacher_.model_id;
  return pair;
}

Expected<QAPair> Synthesizer::parse_refined(const QAPair& pair, std::string_view completion) const {
  static constexpr std::string_view kLabels[] = {"QUESTION", "RESPONSE"};
  auto fields = envelope::parse(completion, kLabels);
  auto question = fields.find("QUESTION");
  auto response = fields.find("RESPONSE");
  if (question == fields.end() || response == fields.end()) {
    return ItemError{ItemErrorKind::kExtraction,
                     "teacher output lacks a QUESTION: or RESPONSE: envelope", 0};
  }
  QAPair refined;
  refined.id = pair.id;
  refined.instruction = question->second;
  refined.response = response->second;
  refined.stage = Stage::kRefined;
  refined.teacher_model = teacher_.model_id;
  refined.original.emplace(pair.instruction, pair.response);
  return refined;
}

Expected<QAPair> Synthesizer::generate_reverse_instruction(const corpus::SeedPassage& passage) {
  try {
    auto completion =
        gateway_.complete(gateway::make_user_request(teacher_, render_reverse_prompt(passage), params_));
    return parse_reverse(passage, completion.text);
  } catch (const gateway::GatewayError& e) {
    return e.to_item_error();
  }
}

Expected<QAPair> Synthesizer::refine_pair(const QAPair& pair) {
  if (pair.stage != Stage::kGenerated) {
    throw PreconditionError("pair " + pair.id + " is already refined");
  }
  try {
    auto completion =
        gateway_.complete(gateway::make_user_request(teacher_, render_refine_prompt(pair), params_));
    return parse_refined(pair, completion.text);
  } catch (const gateway::GatewayError& e) {
    return e.to_item_error();
  }
}

namespace {

// Runs `requests` through the gateway and folds results with `parse`,
// rejecting repeated ids before any call is made.
template <typename Input, typename Render, typename Parse>
BatchOutcome<QAPair> run_batch(gateway::Gateway& gateway, const gateway::ModelEndpoint& teacher,
                               const gateway::GenerationParams& params,
                               std::span<const Input> inputs, std::size_t max_in_flight,
                               Render render_prompt, Parse parse) {
  BatchOutcome<QAPair> outcome;
  std::set<std::string> seen;
  std::vector<std::size_t> indices;
  std::vector<gateway::ChatRequest> requests;
  // Slot per input: either an error decided up front or a request index.
  std::vector<std::optional<ItemError>> early(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!seen.insert(inputs[i].id).second) {
      early[i] = ItemError{ItemErrorKind::kPrecondition, "duplicate id " + inputs[i].id, 0};
      continue;
    }
    if constexpr (std::is_same_v<Input, QAPair>) {
      if (inputs[i].stage != Stage::kGenerated) {
        early[i] = ItemError{ItemErrorKind::kPrecondition, "pair " + inputs[i].id + " is already refined", 0};
        continue;
      }
    }
    indices.push_back(i);
    requests.push_back(gateway::make_user_request(teacher, render_prompt(inputs[i]), params));
  }
  auto results = gateway.complete_batch(requests, max_in_flight);

  std::size_t r = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (early[i]) {
      outcome.errors.emplace_back(inputs[i].id, *early[i]);
      continue;
    }
    auto& result = results[r++];
    if (!result) {
      outcome.errors.emplace_back(inputs[i].id, result.error());
      continue;
    }
    auto parsed = parse(inputs[i], result->text);
    if (parsed) {
      outcome.items.push_back(std::move(parsed).value());
    } else {
      outcome.errors.emplace_back(inputs[i].id, parsed.error());
    }
  }
  return outcome;
}

}  // namespace

BatchOutcome<QAPair> Synthesizer::generate_batch(std::span<const corpus::SeedPassage> passages,
                                                 std::size_t max_in_flight) {
  return run_batch(
      gateway_, teacher_, params_, passages, max_in_flight,
      [this](const corpus::SeedPassage& p) { return render_reverse_prompt(p); },
      [this](const corpus::SeedPassage& p, std::string_view text) { return parse_reverse(p, text); });
}

BatchOutcome<QAPair> Synthesizer::refine_batch(std::span<const QAPair> pairs,
                                               std::size_t max_in_flight) {
  return run_batch(
      gateway_, teacher_, params_, pairs, max_in_flight,
      [this](const QAPair& p) { return render_refine_prompt(p); },
      [this](const QAPair& p, std::string_view text) { return parse_refined(p, text); });
}

}  // namespace xling::synthesis
