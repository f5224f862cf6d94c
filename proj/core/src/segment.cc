// SPDX-License-Identifier: Apache-2.0
#include "xling/segment.h"

#include <algorithm>
#include <cctype>

#include "xling/errors.h"
#include "xling/gateway.h"
#include "xling/jsonl.h"
#include "xling/unicode.h"

namespace xling::translation {

std::string SegmentedText::join() const {
  std::string out;
  for (const auto& s : segments) out += s.text;
  return out;
}

std::size_t SegmentedText::sentence_count() const {
  return static_cast<std::size_t>(std::count_if(segments.begin(), segments.end(), [](const Segment& s) {
    return s.kind == SegmentKind::kSentence;
  }));
}

std::vector<std::string> SegmentedText::sentences() const {
  std::vector<std::string> out;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::kSentence) out.push_back(s.text);
  }
  return out;
}

std::vector<std::string> SegmentedText::separators() const {
  std::vector<std::string> out;
  for (const auto& s : segments) {
    if (s.kind == SegmentKind::kSeparator) out.push_back(s.text);
  }
  return out;
}

namespace {

class Builder {
 public:
  explicit Builder(std::string_view text) : text_(text) {}

  void add(SegmentKind kind, std::size_t begin, std::size_t end) {
    if (end <= begin) return;
    auto piece = text_.substr(begin, end - begin);
    if (kind == SegmentKind::kSeparator && !out_.segments.empty() &&
        out_.segments.back().kind == SegmentKind::kSeparator) {
      out_.segments.back().text += piece;
      return;
    }
    out_.segments.push_back({kind, std::string(piece)});
  }

  SegmentedText take() { return std::move(out_); }

 private:
  std::string_view text_;
  SegmentedText out_;
};

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

bool is_terminator(char32_t cp) { return cp == '.' || cp == '?' || cp == '!' || cp == U'…'; }

bool is_hard_terminator(char32_t cp) {
  return cp == U'。' || cp == U'！' || cp == U'？' || cp == U'।';
}

bool is_closer(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == '}' || cp == U'”' ||
         cp == U'’' || cp == U'»' || cp == U'」' || cp == U'』' || cp == U'）';
}

bool is_opener(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == '(' || cp == '[' || cp == U'“' || cp == U'‘' ||
         cp == U'«' || cp == U'「';
}

// Length in bytes of a list/heading/quote marker at `pos`, including the
// spaces after it, or 0.
std::size_t marker_length(std::string_view text, std::size_t pos, std::size_t end) {
  auto spaces_after = [&](std::size_t i) -> std::size_t {
    if (i >= end || (text[i] != ' ' && text[i] != '\t')) return 0;
    while (i < end && (text[i] == ' ' || text[i] == '\t')) ++i;
    return i - pos;
  };
  if (pos >= end) return 0;
  const char c = text[pos];
  if (c == '-' || c == '*' || c == '+' || c == '>') return spaces_after(pos + 1);
  if (text.substr(pos).starts_with("•")) return spaces_after(pos + 3);
  if (c == '#') {
    std::size_t i = pos;
    while (i < end && text[i] == '#' && i - pos < 6) ++i;
    return spaces_after(i);
  }
  if (std::isdigit(static_cast<unsigned char>(c))) {
    std::size_t i = pos;
    while (i < end && std::isdigit(static_cast<unsigned char>(text[i])) && i - pos < 3) ++i;
    if (i < end && (text[i] == '.' || text[i] == ')')) return spaces_after(i + 1);
  }
  return 0;
}

}  // namespace

RuleSegmenter::RuleSegmenter() : RuleSegmenter(default_abbreviations()) {}

RuleSegmenter::RuleSegmenter(std::vector<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {
  for (auto& a : abbreviations_) {
    std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return std::tolower(c); });
  }
}

const std::vector<std::string>& RuleSegmenter::default_abbreviations() {
  static const std::vector<std::string> kList = {
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",   "jr.",  "st.",   "mt.",  "vs.",
      "etc.",  "e.g.",  "i.e.",  "cf.",   "al.",   "inc.",  "ltd.", "co.",   "corp.", "no.",
      "nos.",  "fig.",  "figs.", "vol.",  "pp.",   "p.",    "ch.",  "sec.",  "eq.",  "approx.",
      "est.",  "dept.", "univ.", "gen.",  "col.",  "lt.",   "sgt.", "capt.", "gov.", "rev.",
      "u.s.",  "u.k.",  "a.m.",  "p.m.",  "jan.",  "feb.",  "mar.", "apr.",  "jun.", "jul.",
      "aug.",  "sep.",  "sept.", "oct.",  "nov.",  "dec.",  "ca.",  "op.",   "ed.",  "eds."};
  return kList;
}

bool RuleSegmenter::is_abbreviation(std::string_view token) const {
  if (token.size() == 2 && std::isupper(static_cast<unsigned char>(token[0]))) return true;
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(abbreviations_.begin(), abbreviations_.end(), lower) != abbreviations_.end();
}

SegmentedText RuleSegmenter::segment(std::string_view text) const {
  Builder out(text);

  auto split_sentences = [&](std::size_t begin, std::size_t end) {
    std::size_t start = begin;
    std::size_t j = begin;
    while (j < end) {
      std::size_t after = j;
      const char32_t cp = unicode::decode_next(text, after);
      if (is_hard_terminator(cp)) {
        std::size_t k = after;
        while (k < end) {
          std::size_t probe = k;
          const char32_t next = unicode::decode_next(text, probe);
          if (!is_closer(next) && !is_hard_terminator(next)) break;
          k = probe;
        }
        std::size_t m = k;
        while (m < end && is_blank(text[m])) ++m;
        if (m < end) {
          out.add(SegmentKind::kSentence, start, k);
          out.add(SegmentKind::kSeparator, k, m);
          start = m;
        }
        j = m;
        continue;
      }
      if (!is_terminator(cp)) {
        j = after;
        continue;
      }
      std::size_t k = after;
      while (k < end) {
        std::size_t probe = k;
        const char32_t next = unicode::decode_next(text, probe);
        if (!is_terminator(next) && !is_closer(next)) break;
        k = probe;
      }
      if (k >= end || !is_blank(text[k])) {
        j = k;
        continue;
      }
      std::size_t m = k;
      while (m < end && is_blank(text[m])) ++m;
      if (m >= end) {
        j = m;
        continue;
      }
      std::size_t probe = m;
      char32_t next = unicode::decode_next(text, probe);
      if (is_opener(next) && probe < end) next = unicode::decode_next(text, probe);
      const bool starts_sentence = unicode::is_upper(next) || unicode::is_caseless_letter(next);
      bool abbreviation = false;
      if (cp == '.') {
        std::size_t token_start = j;
        while (token_start > start && !is_blank(text[token_start - 1])) --token_start;
        abbreviation = is_abbreviation(text.substr(token_start, after - token_start));
      }
      if (starts_sentence && !abbreviation) {
        out.add(SegmentKind::kSentence, start, k);
        out.add(SegmentKind::kSeparator, k, m);
        start = m;
      }
      j = m;
    }
    out.add(SegmentKind::kSentence, start, end);
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto newline = text.find('\n', pos);
    const std::size_t line_end = newline == std::string_view::npos ? text.size() : newline;

    std::size_t i = pos;
    while (i < line_end && is_blank(text[i])) ++i;
    i += marker_length(text, i, line_end);
    out.add(SegmentKind::kSeparator, pos, i);

    std::size_t content_end = line_end;
    while (content_end > i && is_blank(text[content_end - 1])) --content_end;
    split_sentences(i, content_end);
    out.add(SegmentKind::kSeparator, content_end, line_end);

    if (newline == std::string_view::npos) break;
    out.add(SegmentKind::kSeparator, newline, newline + 1);
    pos = newline + 1;
  }
  return out.take();
}

bool align_sentences(std::string_view text, const std::vector<std::string>& sentences,
                     SegmentedText& out) {
  Builder builder(text);
  std::size_t pos = 0;
  for (const auto& raw : sentences) {
    const auto sentence = unicode::trim(raw);
    if (sentence.empty()) continue;
    const auto found = text.find(sentence, pos);
    if (found == std::string_view::npos) return false;
    // Anything skipped over must be whitespace or list markup, never words.
    const auto gap = text.substr(pos, found - pos);
    if (!unicode::trim(gap).empty()) {
      RuleSegmenter rules;
      auto gap_segments = rules.segment(gap);
      if (gap_segments.sentence_count() != 0) return false;
    }
    builder.add(SegmentKind::kSeparator, pos, found);
    // A returned sentence spanning a line break is split at the newline so
    // sentence segments never carry newlines.
    std::size_t s = found;
    const std::size_t e = found + sentence.size();
    while (s < e) {
      auto nl = text.find('\n', s);
      if (nl == std::string_view::npos || nl >= e) {
        builder.add(SegmentKind::kSentence, s, e);
        break;
      }
      std::size_t seg_end = nl;
      while (seg_end > s && is_blank(text[seg_end - 1])) --seg_end;
      builder.add(SegmentKind::kSentence, s, seg_end);
      std::size_t next = nl + 1;
      while (next < e && (is_blank(text[next]) || text[next] == '\n')) ++next;
      builder.add(SegmentKind::kSeparator, seg_end, next);
      s = next;
    }
    pos = e;
  }
  const auto tail = text.substr(pos);
  if (!unicode::trim(tail).empty()) return false;
  builder.add(SegmentKind::kSeparator, pos, text.size());
  out = builder.take();
  return true;
}

ServiceSegmenter::ServiceSegmenter(gateway::Gateway& gateway, std::string url)
    : gateway_(gateway), url_(std::move(url)) {}

SegmentedText ServiceSegmenter::segment(std::string_view text) const {
  if (text.empty()) return {};
  try {
    const auto body = gateway_.post_with_retry(url_, dump_compact(Json{{"text", text}}), {});
    const auto doc = Json::parse(body);
    const auto sentences = doc.at("sentences").get<std::vector<std::string>>();
    SegmentedText out;
    if (align_sentences(text, sentences, out)) return out;
  } catch (const std::exception&) {
  }
  return fallback_.segment(text);
}

SegmentedText segment(std::string_view text) {
  static const RuleSegmenter kDefault;
  return kDefault.segment(text);
}

std::string reconstruct(const SegmentedText& segmented, const std::vector<std::string>& translations) {
  if (translations.size() != segmented.sentence_count()) {
    throw PreconditionError("reconstruct: " + std::to_string(translations.size()) +
                            " translations for " + std::to_string(segmented.sentence_count()) +
                            " sentences");
  }
  std::string out;
  std::size_t next = 0;
  for (const auto& s : segmented.segments) {
    out += s.kind == SegmentKind::kSentence ? translations[next++] : s.text;
  }
  return out;
}

}  // namespace xling::translation
