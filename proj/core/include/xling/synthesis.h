// SPDX-License-Identifier: Apache-2.0
//
// Stages 1 and 2: ask a teacher model for an instruction that the seed
// passage answers, then reword the pair against four fixed criteria while
// staying grounded in the original response.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/corpus.h"
#include "xling/errors.h"
#include "xling/gateway.h"
#include "xling/jsonl.h"
#include "xling/templates.h"

namespace xling::synthesis {

enum class Stage { kGenerated, kRefined };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

struct QAPair {
  std::string id;  // the seed passage id
  std::string instruction;
  std::string response;
  Stage stage = Stage::kGenerated;
  std::string teacher_model;
  // The generated pair a refined pair came from, kept for audit.
  std::optional<std::pair<std::string, std::string>> original;
};

Json to_json(const QAPair& pair);
QAPair qa_pair_from_json(const Json& row);

struct Criterion {
  std::string_view key;
  std::string_view name;
  std::string_view definition;
};

inline constexpr std::array<Criterion, 4> kRefinementCriteria = {{
    {"question_self_sufficiency", "Question Self-Sufficiency",
     "The question is clear and unambiguous on its own. Nothing beyond the question itself "
     "should be needed to arrive at the given response."},
    {"response_naturalness", "Response Naturalness",
     "The response reads like a fluent answer from an AI assistant: neutral, objective, and "
     "consistent with the tone and style such assistants use."},
    {"response_precision", "Response Precision",
     "Everything in the response is on topic, factually accurate, and directly answers the "
     "question. Irrelevant or unsupported material is removed."},
    {"response_informativeness", "Response Informativeness",
     "The response is helpful and complete, with enough explanation and justification to be "
     "useful to the person asking."},
}};

inline constexpr std::string_view kGroundingInstruction =
    "Keep the reworded response grounded in the original response and do not add any "
    "knowledge of your own.";

// Numbered "Name: definition" lines for every criterion.
std::string render_criteria();

template <typename T>
struct BatchOutcome {
  std::vector<T> items;  // successes, input order
  std::vector<std::pair<std::string, ItemError>> errors;  // (item id, error)
};

class Synthesizer {
 public:
  // Throws ConfigError when a template lacks a required placeholder:
  // reverse needs {passage}; refine needs {criteria}, {grounding},
  // {question} and {response}.
  Synthesizer(gateway::Gateway& gateway, gateway::ModelEndpoint teacher,
              gateway::GenerationParams params, PromptTemplate reverse_template,
              PromptTemplate refine_template);

  std::string render_reverse_prompt(const corpus::SeedPassage& passage) const;
  std::string render_refine_prompt(const QAPair& pair) const;

  // Interpret a teacher completion. Missing envelopes yield kExtraction.
  Expected<QAPair> parse_reverse(const corpus::SeedPassage& passage,
                                 std::string_view completion) const;
  Expected<QAPair> parse_refined(const QAPair& pair, std::string_view completion) const;

  Expected<QAPair> generate_reverse_instruction(const corpus::SeedPassage& passage);

  // Throws PreconditionError unless pair.stage is kGenerated.
  Expected<QAPair> refine_pair(const QAPair& pair);

  // successes + errors == inputs. A repeated id is an item error.
  BatchOutcome<QAPair> generate_batch(std::span<const corpus::SeedPassage> passages,
                                      std::size_t max_in_flight);
  BatchOutcome<QAPair> refine_batch(std::span<const QAPair> pairs, std::size_t max_in_flight);

  const gateway::ModelEndpoint& teacher() const { return teacher_; }

 private:
  gateway::Gateway& gateway_;
  gateway::ModelEndpoint teacher_;
  gateway::GenerationParams params_;
  PromptTemplate reverse_;
  PromptTemplate refine_;
};

}  // namespace xling::synthesis
