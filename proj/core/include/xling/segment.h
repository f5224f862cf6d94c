// SPDX-License-Identifier: Apache-2.0
//
// Lossless sentence segmentation. A text decomposes into alternating sentence
// and separator segments whose concatenation is the original byte string, so
// formatting (blank lines, bullets, numbering) survives sentence-level
// translation untouched.
#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace xling::gateway {
class Gateway;
}

namespace xling::translation {

enum class SegmentKind { kSentence, kSeparator };

struct Segment {
  SegmentKind kind = SegmentKind::kSentence;
  std::string text;

  bool operator==(const Segment&) const = default;
};

struct SegmentedText {
  std::vector<Segment> segments;

  std::string join() const;
  std::size_t sentence_count() const;
  std::vector<std::string> sentences() const;
  std::vector<std::string> separators() const;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmentedText segment(std::string_view text) const = 0;
};

// Line-oriented rules:
//  - leading indentation, list markers ("- ", "* ", "+ ", "• ", "1. ", "1) "),
//    heading ("## ") and quote ("> ") markers, trailing blanks and newlines
//    are separators;
//  - inside a line, ".", "?", "!" (plus closing quotes/brackets) end a
//    sentence when followed by whitespace and an uppercase or caseless
//    letter, unless the preceding token is a known abbreviation or a single
//    capital initial;
//  - "。", "！", "？" and "।" end a sentence unconditionally.
class RuleSegmenter final : public Segmenter {
 public:
  RuleSegmenter();
  explicit RuleSegmenter(std::vector<std::string> abbreviations);

  SegmentedText segment(std::string_view text) const override;

  static const std::vector<std::string>& default_abbreviations();

 private:
  bool is_abbreviation(std::string_view token) const;

  std::vector<std::string> abbreviations_;  // lowercase, with trailing '.'
};

// Delegates sentence detection to an external service and aligns the returned
// sentences back onto the input so the decomposition stays lossless. POSTs
// {"text": ...} and expects {"sentences": [...]}. Falls back to the rule
// segmenter when the call fails or the sentences cannot be aligned.
class ServiceSegmenter final : public Segmenter {
 public:
  ServiceSegmenter(gateway::Gateway& gateway, std::string url);
  SegmentedText segment(std::string_view text) const override;

 private:
  gateway::Gateway& gateway_;
  std::string url_;
  RuleSegmenter fallback_;
};

// Builds a segmentation from sentence strings found in order within `text`.
// Returns false, leaving `out` untouched, when they cannot be aligned.
bool align_sentences(std::string_view text, const std::vector<std::string>& sentences,
                     SegmentedText& out);

// Convenience wrapper over a default RuleSegmenter.
SegmentedText segment(std::string_view text);

// Replaces each sentence segment's text with the next translation and keeps
// separators verbatim. translations.size() must equal sentence_count().
std::string reconstruct(const SegmentedText& segmented, const std::vector<std::string>& translations);

}  // namespace xling::translation
