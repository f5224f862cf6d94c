// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "test_support.h"
#include "xling/http_transport.h"
#include "xling/mock_transport.h"
#include "xling/translation.h"

namespace xling::translation {
namespace {

using gateway::MockTransport;

PromptTemplate translate_tpl() { return {"translate", "t", "Translate from {src} to {tgt}.\n\n{text}"}; }

gateway::ModelEndpoint backend(const std::string& variant) {
  return testing::endpoint("mt-" + variant, "mock://translator/" + variant, gateway::Role::kTranslator);
}

struct Rig {
  std::shared_ptr<MockTransport> mock = std::make_shared<MockTransport>();
  std::shared_ptr<gateway::RoutingTransport> routing = std::make_shared<gateway::RoutingTransport>(nullptr, mock);
  gateway::Gateway gw{routing, std::make_shared<MemoryCache>()};
  qe::QeScorer scorer{gw, "length-ratio", "mock://qe/length-ratio"};
  Translator translator{gw, scorer, translate_tpl(), {0.0, 256, {}}};

  Rig() { testing::no_sleep(gw); }
};

TEST(Strategy, ValidationAndTags) {
  EXPECT_EQ(SelectionStrategy::naive(backend("a")).tag(), "naive");
  EXPECT_EQ(SelectionStrategy::best_of_k({backend("a"), backend("b"), backend("c")}).tag(), "best_of_3");
  EXPECT_EQ(SelectionStrategy::random({backend("a"), backend("b")}, 1).tag(), "random");
  EXPECT_THROW(SelectionStrategy::best_of_k({backend("a")}).validate(), ConfigError);
  SelectionStrategy bad = SelectionStrategy::best_of_k({backend("a"), backend("b")});
  bad.k = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(SelectBest, HighestWinsEarliestOnTies) {
  std::vector<TranslationCandidate> c = {{"a", "x", 0.5}, {"b", "y", 0.9}, {"c", "z", 0.9}};
  EXPECT_EQ(select_best(c).backend_id, "b");
  std::vector<TranslationCandidate> tie = {{"a", "x", 0.5}, {"b", "y", 0.5}};
  EXPECT_EQ(select_best(tie).backend_id, "a");
}

TEST(Translator, PromptUsesDisplayNames) {
  Rig rig;
  EXPECT_EQ(rig.translator.render_prompt("Hi.", "eng", "deu"), "Translate from English to German.\n\nHi.");
}

TEST(Translator, BestOfKPicksTheHighestQe) {
  Rig rig;
  auto strategy = SelectionStrategy::best_of_k({backend("a"), backend("bb"), backend("ccc")});
  for (const std::string s : {"The cat sat.", "It rained all day.", "Birds fly south in winter."}) {
    auto got = rig.translator.translate_sentence(s, "eng", "deu", strategy);
    ASSERT_TRUE(got);
    double best = -1.0;
    for (const auto& v : {"a", "bb", "ccc"}) {
      best = std::max(best, MockTransport::length_ratio(s, MockTransport::translate(v, s)));
    }
    EXPECT_DOUBLE_EQ(got->qe, best);
    EXPECT_DOUBLE_EQ(got->qe, MockTransport::length_ratio(s, got->text));
  }
}

TEST(Translator, NaiveUsesOnlyTheFirstBackend) {
  Rig rig;
  auto got = rig.translator.translate_sentence("Hello there.", "eng", "fra", SelectionStrategy::naive(backend("a")));
  ASSERT_TRUE(got);
  EXPECT_EQ(got->backend_id, "mt-a");
  EXPECT_EQ(got->text, MockTransport::translate("a", "Hello there."));
}

TEST(Translator, RandomIsSeededPerSentence) {
  Rig rig;
  auto strategy = SelectionStrategy::random({backend("a"), backend("bb"), backend("ccc")}, 17);
  std::vector<std::string> sentences;
  for (int i = 0; i < 30; ++i) sentences.push_back("Sentence number " + std::to_string(i) + ".");
  auto first = rig.translator.translate_sentences(sentences, "eng", "deu", strategy);
  auto second = rig.translator.translate_sentences(sentences, "eng", "deu", strategy);
  std::set<std::string> used;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    ASSERT_TRUE(first[i] && second[i]);
    EXPECT_EQ(first[i]->backend_id, second[i]->backend_id);
    used.insert(first[i]->backend_id);
  }
  EXPECT_GT(used.size(), 1u);
}

TEST(Translator, ResponseKeepsFormattingAndMeanScore) {
  Rig rig;
  const std::string text = "Intro line.\n\n- First point.\n- Second point.";
  auto got = rig.translator.translate_response(text, "eng", "por", SelectionStrategy::naive(backend("a")));
  ASSERT_TRUE(got);
  ASSERT_EQ(got->sentence_scores.size(), 3u);
  const std::string expected = MockTransport::translate("a", "Intro line.") + "\n\n- " +
                               MockTransport::translate("a", "First point.") + "\n- " +
                               MockTransport::translate("a", "Second point.");
  EXPECT_EQ(got->text, expected);
  double mean = 0;
  for (double s : got->sentence_scores) mean += s;
  EXPECT_DOUBLE_EQ(got->passage_qe, mean / 3.0);
  EXPECT_EQ(got->sentence_backends, (std::vector<std::string>(3, "mt-a")));
}

TEST(Translator, FailuresPropagate) {
  Rig rig;
  auto fail = testing::endpoint("down", "mock://fail", gateway::Role::kTranslator);
  auto strategy = SelectionStrategy::best_of_k({fail, backend("a")});
  auto partial = rig.translator.translate_sentence("Still works.", "eng", "deu", strategy);
  ASSERT_TRUE(partial);
  EXPECT_EQ(partial->backend_id, "mt-a");

  auto all_down = rig.translator.translate_response("One. Two.", "eng", "deu", SelectionStrategy::naive(fail));
  ASSERT_FALSE(all_down);
  EXPECT_EQ(all_down.error().kind, ItemErrorKind::kTranslation);

  auto same = rig.translator.translate_sentence("x.", "deu", "deu", SelectionStrategy::naive(backend("a")));
  ASSERT_FALSE(same);
  EXPECT_FALSE(rig.translator.translate_response("   ", "eng", "deu", SelectionStrategy::naive(backend("a"))));
}

TEST(Translator, QeFailureIsAnItemError) {
  auto mock = std::make_shared<MockTransport>();
  gateway::Gateway gw(std::make_shared<gateway::RoutingTransport>(nullptr, mock), nullptr);
  testing::no_sleep(gw);
  qe::QeScorer scorer(gw, "broken", "mock://reject");
  Translator translator(gw, scorer, translate_tpl(), {});
  auto got = translator.translate_sentence("Hello.", "eng", "deu", SelectionStrategy::naive(backend("a")));
  ASSERT_FALSE(got);
  EXPECT_EQ(got.error().kind, ItemErrorKind::kQe);
}

TEST(Translator, WholeTextPassThroughBackend) {
  Rig rig;
  auto got = rig.translator.translate_text("Line one.\nLine two.", "eng", "deu", backend("p"));
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, MockTransport::translate("p", "Line one.\nLine two."));
}

TEST(Qe, ResponseValidation) {
  EXPECT_EQ(qe::parse_response("[0.5, 1]", 2), (std::vector<double>{0.5, 1.0}));
  EXPECT_THROW(qe::parse_response("[0.5]", 2), gateway::ProtocolError);
  EXPECT_THROW(qe::parse_response("[1.5]", 1), gateway::ProtocolError);
  EXPECT_THROW(qe::parse_response("{}", 1), gateway::ProtocolError);
}

}  // namespace
}  // namespace xling::translation
