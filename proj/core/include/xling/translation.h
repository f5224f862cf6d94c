// SPDX-License-Identifier: Apache-2.0
//
// Stage 3: sentence-level translation of a refined response. Each sentence is
// translated by one backend (naive), one seeded-random backend (random), or k
// backends with the best QE score kept (best-of-k). Separators are copied
// verbatim during reconstruction.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xling/errors.h"
#include "xling/gateway.h"
#include "xling/qe.h"
#include "xling/segment.h"
#include "xling/templates.h"

namespace xling::translation {

struct TranslationCandidate {
  std::string backend_id;
  std::string text;
  double qe = 0.0;
};

struct SelectionStrategy {
  enum class Kind { kNaive, kBestOfK, kRandom };

  Kind kind = Kind::kNaive;
  std::vector<gateway::ModelEndpoint> backends;  // priority order
  std::size_t k = 1;
  std::uint64_t rng_seed = 0;

  static SelectionStrategy naive(gateway::ModelEndpoint backend);
  static SelectionStrategy best_of_k(std::vector<gateway::ModelEndpoint> backends);
  static SelectionStrategy random(std::vector<gateway::ModelEndpoint> backends, std::uint64_t seed);

  // Throws ConfigError. best_of_k needs k == |backends| >= 2.
  void validate() const;

  // "naive", "best_of_<k>" or "random".
  std::string tag() const;
};

// Highest qe wins; ties go to the earliest candidate. Requires non-empty input.
const TranslationCandidate& select_best(std::span<const TranslationCandidate> candidates);

struct TranslatedResponse {
  std::string text;
  std::vector<double> sentence_scores;
  std::vector<std::string> sentence_backends;
  double passage_qe = 0.0;  // unweighted mean of sentence_scores
};

class Translator {
 public:
  // The template needs {src}, {tgt} and {text}; {src}/{tgt} receive display
  // names.
  Translator(gateway::Gateway& gateway, qe::QeScorer& scorer, PromptTemplate translate_template,
             gateway::GenerationParams params,
             std::shared_ptr<const Segmenter> segmenter = std::make_shared<RuleSegmenter>(),
             std::size_t max_in_flight = 8);

  std::string render_prompt(std::string_view text, std::string_view src_lang,
                            std::string_view tgt_lang) const;

  Expected<TranslationCandidate> translate_sentence(const std::string& sentence,
                                                    std::string_view src_lang,
                                                    std::string_view tgt_lang,
                                                    const SelectionStrategy& strategy);

  // All sentences' translator calls go out as one gateway batch, then one QE
  // batch.
  std::vector<Expected<TranslationCandidate>> translate_sentences(
      std::span<const std::string> sentences, std::string_view src_lang,
      std::string_view tgt_lang, const SelectionStrategy& strategy);

  // Fails as a whole when any sentence fails or when there are no sentences.
  Expected<TranslatedResponse> translate_response(std::string_view response_text,
                                                  std::string_view src_lang,
                                                  std::string_view tgt_lang,
                                                  const SelectionStrategy& strategy);

  // Whole-text translation without segmentation or QE, e.g. for benchmark
  // prompts.
  Expected<std::string> translate_text(const std::string& text, std::string_view src_lang,
                                       std::string_view tgt_lang,
                                       const gateway::ModelEndpoint& backend);

  const Segmenter& segmenter() const { return *segmenter_; }

 private:
  gateway::Gateway& gateway_;
  qe::QeScorer& scorer_;
  PromptTemplate template_;
  gateway::GenerationParams params_;
  std::shared_ptr<const Segmenter> segmenter_;
  std::size_t max_in_flight_;
};

}  // namespace xling::translation
