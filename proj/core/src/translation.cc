// SPDX-License-Identifier: Apache-2.0
#include "xling/translation.h"

#include <numeric>
#include <optional>

#include "xling/languages.h"
#include "xling/rng.h"
#include "xling/unicode.h"

namespace xling::translation {

SelectionStrategy SelectionStrategy::naive(gateway::ModelEndpoint backend) {
  SelectionStrategy s;
  s.kind = Kind::kNaive;
  s.backends.push_back(std::move(backend));
  s.k = 1;
  return s;
}

SelectionStrategy SelectionStrategy::best_of_k(std::vector<gateway::ModelEndpoint> backends) {
  SelectionStrategy s;
  s.kind = Kind::kBestOfK;
  s.k = backends.size();
  s.backends = std::move(backends);
  return s;
}

SelectionStrategy SelectionStrategy::random(std::vector<gateway::ModelEndpoint> backends,
                                            std::uint64_t seed) {
  SelectionStrategy s;
  s.kind = Kind::kRandom;
  s.k = 1;
  s.backends = std::move(backends);
  s.rng_seed = seed;
  return s;
}

void SelectionStrategy::validate() const {
  switch (kind) {
    case Kind::kNaive:
      if (backends.size() != 1) throw ConfigError("naive translation needs exactly one backend");
      break;
    case Kind::kBestOfK:
      if (k < 2 || backends.size() != k) {
        throw ConfigError("best_of_k needs k >= 2 backends (got " + std::to_string(backends.size()) + ")");
      }
      break;
    case Kind::kRandom:
      if (backends.empty()) throw ConfigError("random translation needs at least one backend");
      break;
  }
}

std::string SelectionStrategy::tag() const {
  switch (kind) {
    case Kind::kNaive:
      return "naive";
    case Kind::kBestOfK:
      return "best_of_" + std::to_string(k);
    case Kind::kRandom:
      return "random";
  }
  return "unknown";
}

const TranslationCandidate& select_best(std::span<const TranslationCandidate> candidates) {
  if (candidates.empty()) throw PreconditionError("select_best needs at least one candidate");
  const TranslationCandidate* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (c.qe > best->qe) best = &c;
  }
  return *best;
}

Translator::Translator(gateway::Gateway& gateway, qe::QeScorer& scorer,
                       PromptTemplate translate_template, gateway::GenerationParams params,
                       std::shared_ptr<const Segmenter> segmenter, std::size_t max_in_flight)
    : gateway_(gateway),
      scorer_(scorer),
      template_(std::move(translate_template)),
      params_(std::move(params)),
      segmenter_(std::move(segmenter)),
      max_in_flight_(max_in_flight == 0 ? 1 : max_in_flight) {
  template_.require({"src", "tgt", "text"});
}

std::string Translator::render_prompt(std::string_view text, std::string_view src_lang,
                                      std::string_view tgt_lang) const {
  return render(template_.text, {{"src", std::string(languages::require_display_name(src_lang))},
                                 {"tgt", std::string(languages::require_display_name(tgt_lang))},
                                 {"text", std::string(text)}});
}

namespace {

std::size_t random_backend(const SelectionStrategy& strategy, std::string_view sentence,
                           std::string_view tgt_lang) {
  std::string label(tgt_lang);
  label += '\x1f';
  label += sentence;
  Rng rng(derive_seed(strategy.rng_seed, label));
  return static_cast<std::size_t>(rng.below(strategy.backends.size()));
}

}  // namespace

std::vector<Expected<TranslationCandidate>> Translator::translate_sentences(
    std::span<const std::string> sentences, std::string_view src_lang, std::string_view tgt_lang,
    const SelectionStrategy& strategy) {
  strategy.validate();
  const std::size_t n = sentences.size();
  std::vector<std::optional<Expected<TranslationCandidate>>> out(n);
  if (src_lang == tgt_lang) {
    for (auto& slot : out) {
      slot.emplace(ItemError{ItemErrorKind::kPrecondition, "source and target language are equal", 0});
    }
  }

  // Which backends each sentence asks.
  std::vector<std::vector<std::size_t>> plan(n);
  std::vector<gateway::ChatRequest> requests;
  std::vector<std::pair<std::size_t, std::size_t>> owner;  // request -> (sentence, backend)
  for (std::size_t i = 0; i < n; ++i) {
    if (out[i]) continue;
    if (unicode::trim(sentences[i]).empty()) {
      out[i].emplace(ItemError{ItemErrorKind::kPrecondition, "empty sentence", 0});
      continue;
    }
    switch (strategy.kind) {
      case SelectionStrategy::Kind::kNaive:
        plan[i] = {0};
        break;
      case SelectionStrategy::Kind::kRandom:
        plan[i] = {random_backend(strategy, sentences[i], tgt_lang)};
        break;
      case SelectionStrategy::Kind::kBestOfK:
        plan[i].resize(strategy.backends.size());
        std::iota(plan[i].begin(), plan[i].end(), 0);
        break;
    }
    const std::string prompt = render_prompt(sentences[i], src_lang, tgt_lang);
    for (std::size_t b : plan[i]) {
      requests.push_back(gateway::make_user_request(strategy.backends[b], prompt, params_));
      owner.emplace_back(i, b);
    }
  }

  auto completions = gateway_.complete_batch(requests, max_in_flight_);

  // Candidates that came back, grouped by sentence in backend priority order.
  std::vector<std::vector<TranslationCandidate>> candidates(n);
  std::vector<std::vector<std::size_t>> qe_index(n);
  std::vector<ItemError> last_error(n);
  std::vector<qe::QeRequest> qe_requests;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto [i, b] = owner[r];
    auto& result = completions[r];
    if (!result) {
      last_error[i] = result.error();
      continue;
    }
    auto text = std::string(unicode::trim(result->text));
    if (text.empty()) {
      last_error[i] = ItemError{ItemErrorKind::kProtocol, "empty translation from " + strategy.backends[b].model_id, 0};
      continue;
    }
    qe_index[i].push_back(qe_requests.size());
    qe_requests.push_back({sentences[i], text, std::string(src_lang), std::string(tgt_lang)});
    candidates[i].push_back({strategy.backends[b].model_id, std::move(text), 0.0});
  }

  auto scores = scorer_.score_batch(qe_requests);

  for (std::size_t i = 0; i < n; ++i) {
    if (out[i]) continue;
    if (candidates[i].empty()) {
      ItemError error = last_error[i];
      error.message = "all translation candidates failed: " + error.message;
      error.kind = ItemErrorKind::kTranslation;
      out[i].emplace(std::move(error));
      continue;
    }
    std::optional<ItemError> qe_failure;
    for (std::size_t c = 0; c < candidates[i].size(); ++c) {
      auto& score = scores[qe_index[i][c]];
      if (!score) {
        qe_failure = score.error();
        break;
      }
      candidates[i][c].qe = score->value;
    }
    if (qe_failure) {
      out[i].emplace(std::move(*qe_failure));
      continue;
    }
    out[i].emplace(select_best(candidates[i]));
  }

  std::vector<Expected<TranslationCandidate>> results;
  results.reserve(n);
  for (auto& slot : out) results.push_back(std::move(*slot));
  return results;
}

Expected<TranslationCandidate> Translator::translate_sentence(const std::string& sentence,
                                                              std::string_view src_lang,
                                                              std::string_view tgt_lang,
                                                              const SelectionStrategy& strategy) {
  auto results = translate_sentences(std::span<const std::string>(&sentence, 1), src_lang, tgt_lang, strategy);
  return std::move(results.front());
}

Expected<TranslatedResponse> Translator::translate_response(std::string_view response_text,
                                                            std::string_view src_lang,
                                                            std::string_view tgt_lang,
                                                            const SelectionStrategy& strategy) {
  if (unicode::trim(response_text).empty()) {
    return ItemError{ItemErrorKind::kPrecondition, "response text is empty", 0};
  }
  const SegmentedText segmented = segmenter_->segment(response_text);
  const auto sentences = segmented.sentences();
  if (sentences.empty()) {
    return ItemError{ItemErrorKind::kTranslation, "response has no sentence segments", 0};
  }
  auto results = translate_sentences(sentences, src_lang, tgt_lang, strategy);

  TranslatedResponse translated;
  std::vector<std::string> texts;
  texts.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) {
      ItemError error = results[i].error();
      error.message = "sentence " + std::to_string(i) + ": " + error.message;
      return error;
    }
    texts.push_back(results[i]->text);
    translated.sentence_scores.push_back(results[i]->qe);
    translated.sentence_backends.push_back(results[i]->backend_id);
  }
  translated.text = reconstruct(segmented, texts);
  translated.passage_qe =
      std::accumulate(translated.sentence_scores.begin(), translated.sentence_scores.end(), 0.0) /
      static_cast<double>(translated.sentence_scores.size());
  return translated;
}

Expected<std::string> Translator::translate_text(const std::string& text, std::string_view src_lang,
                                                 std::string_view tgt_lang,
                                                 const gateway::ModelEndpoint& backend) {
  try {
    auto completion =
        gateway_.complete(gateway::make_user_request(backend, render_prompt(text, src_lang, tgt_lang), params_));
    auto trimmed = std::string(unicode::trim(completion.text));
    if (trimmed.empty()) {
      return ItemError{ItemErrorKind::kProtocol, "empty translation from " + backend.model_id, completion.attempts};
    }
    return trimmed;
  } catch (const gateway::GatewayError& e) {
    return e.to_item_error();
  } catch (const PreconditionError& e) {
    return ItemError{ItemErrorKind::kPrecondition, e.what(), 0};
  }
}

}  // namespace xling::translation
