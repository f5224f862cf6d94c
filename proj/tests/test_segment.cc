// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "test_support.h"
#include "xling/mock_transport.h"
#include "xling/rng.h"
#include "xling/segment.h"

namespace xling::translation {
namespace {

std::vector<std::string> sentences_of(std::string_view text) { return segment(text).sentences(); }

TEST(Segment, SplitsOnTerminalPunctuation) {
  EXPECT_EQ(sentences_of("The sky is blue. Grass is green! Is it? Yes."),
            (std::vector<std::string>{"The sky is blue.", "Grass is green!", "Is it?", "Yes."}));
}

TEST(Segment, AbbreviationsAndInitialsDoNotSplit) {
  EXPECT_EQ(sentences_of("Dr. Smith arrived. He met J. Doe, e.g. at noon."),
            (std::vector<std::string>{"Dr. Smith arrived.", "He met J. Doe, e.g. at noon."}));
  EXPECT_EQ(sentences_of("Version 3.5 is out. Pi is 3.14."),
            (std::vector<std::string>{"Version 3.5 is out.", "Pi is 3.14."}));
}

TEST(Segment, ListMarkersAndBlankLinesAreSeparators) {
  const std::string text = "Steps:\n\n1. Mix the flour.\n2. Bake it.\n- Serve warm.\n\n## Notes\n> Enjoy.\n";
  auto seg = segment(text);
  EXPECT_EQ(seg.join(), text);
  EXPECT_EQ(seg.sentences(),
            (std::vector<std::string>{"Steps:", "Mix the flour.", "Bake it.", "Serve warm.", "Notes", "Enjoy."}));
  for (const auto& sep : seg.separators()) {
    EXPECT_EQ(sep.find_first_not_of(" \t\n0123456789.)-*+#>•"), std::string::npos) << sep;
  }
}

TEST(Segment, CjkAndDevanagariTerminators) {
  EXPECT_EQ(sentences_of("天气很好。我们去公园！"), (std::vector<std::string>{"天气很好。", "我们去公园！"}));
  EXPECT_EQ(sentences_of("यह अच्छा है। धन्यवाद।"), (std::vector<std::string>{"यह अच्छा है।", "धन्यवाद।"}));
}

TEST(Segment, EmptyAndWhitespaceOnly) {
  EXPECT_EQ(segment("").sentence_count(), 0u);
  auto ws = segment("  \n\n ");
  EXPECT_EQ(ws.sentence_count(), 0u);
  EXPECT_EQ(ws.join(), "  \n\n ");
}

TEST(Segment, SegmentsAlternateAndAreNonEmpty) {
  auto seg = segment("A b. C d.\n\n- E f.");
  for (std::size_t i = 0; i < seg.segments.size(); ++i) {
    EXPECT_FALSE(seg.segments[i].text.empty());
    if (i > 0) EXPECT_NE(seg.segments[i].kind, seg.segments[i - 1].kind);
  }
}

TEST(Reconstruct, IdentityAndCountCheck) {
  const std::string text = "One. Two.\n\n* Three.";
  auto seg = segment(text);
  EXPECT_EQ(reconstruct(seg, seg.sentences()), text);
  EXPECT_EQ(reconstruct(seg, {"Eins.", "Zwei.", "Drei."}), "Eins. Zwei.\n\n* Drei.");
  EXPECT_THROW(reconstruct(seg, {"x"}), PreconditionError);
}

// Property: for random documents built from formatting fragments, the
// decomposition is lossless and separators survive any per-sentence mapping.
TEST(SegmentProperty, RoundTripOnRandomDocuments) {
  const std::vector<std::string> pieces = {
      "Hello world.", " ", "\n", "\n\n", "- ", "* ", "1. ", "12) ", "## ", "> ", "  ", "Mr. Brown left.",
      "Why?", "Stop!", "e.g. this", "3.14", "Ünïcödé text.", "日本語。", "\t", "• ", "\"Quoted.\" Next.",
      "(Aside.) More."};
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    std::string doc;
    const auto n = rng.below(25);
    for (std::uint64_t i = 0; i < n; ++i) doc += pieces[rng.below(pieces.size())];
    auto seg = segment(doc);
    ASSERT_EQ(seg.join(), doc);
    std::vector<std::string> mapped;
    for (const auto& s : seg.sentences()) mapped.push_back("<" + s + ">");
    const auto rebuilt = reconstruct(seg, mapped);
    ASSERT_EQ(reconstruct(seg, seg.sentences()), doc);
    // Separators are untouched by the mapping.
    std::string stripped;
    std::size_t k = 0;
    for (const auto& s : seg.segments) stripped += s.kind == SegmentKind::kSeparator ? s.text : mapped[k++];
    ASSERT_EQ(stripped, rebuilt);
  }
}

TEST(Align, FindsSentencesInOrder) {
  SegmentedText out;
  ASSERT_TRUE(align_sentences("A b.  C d.\n", {"A b.", "C d."}, out));
  EXPECT_EQ(out.join(), "A b.  C d.\n");
  EXPECT_EQ(out.sentence_count(), 2u);
  SegmentedText untouched;
  EXPECT_FALSE(align_sentences("A b.", {"X."}, untouched));
  EXPECT_TRUE(untouched.segments.empty());
}

TEST(ServiceSegmenter, UsesServiceAndFallsBack) {
  auto mock = std::make_shared<gateway::MockTransport>();
  gateway::Gateway gw(mock, nullptr);
  testing::no_sleep(gw);
  ServiceSegmenter svc(gw, "mock://segmenter");
  const std::string text = "First one. Second one.\n- Third.";
  EXPECT_EQ(svc.segment(text).segments, segment(text).segments);
  EXPECT_EQ(mock->calls(), 1u);
  ServiceSegmenter broken(gw, "mock://reject");
  EXPECT_EQ(broken.segment(text).join(), text);
}

}  // namespace
}  // namespace xling::translation
