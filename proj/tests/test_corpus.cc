// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "test_support.h"
#include "xling/corpus.h"
#include "xling/rng.h"
#include "xling/unicode.h"

namespace xling::corpus {
namespace {

using testing::TempDir;

std::filesystem::path write(const TempDir& dir, const std::string& name, const std::string& body) {
  const auto path = dir.path() / name;
  write_text_atomic(path, body);
  return path;
}

TEST(LoadSeed, AssignsOrdinalIds) {
  TempDir dir;
  auto passages = load_seed(write(dir, "f.txt", "alpha\nbeta\ngamma\n"), SeedFormat::kPlainLines);
  ASSERT_EQ(passages.size(), 3u);
  EXPECT_EQ(passages[0].id, "f:0");
  EXPECT_EQ(passages[1].id, "f:1");
  EXPECT_EQ(passages[2].id, "f:2");
  EXPECT_EQ(passages[1].text, "beta");
  EXPECT_EQ(passages[0].source, "f");
  EXPECT_EQ(passages[0].lang, "eng");
}

TEST(LoadSeed, EmptyFile) {
  TempDir dir;
  LoadStats stats;
  auto passages = load_seed(write(dir, "f.txt", ""), SeedFormat::kPlainLines, "eng", &stats);
  EXPECT_TRUE(passages.empty());
  EXPECT_EQ(stats.skipped, 0u);
  EXPECT_TRUE(stats.warnings.empty());
}

TEST(LoadSeed, BlankLineSkippedAndCounted) {
  TempDir dir;
  LoadStats stats;
  auto passages = load_seed(write(dir, "f.txt", "one\n   \ntwo\n"), SeedFormat::kPlainLines, "eng", &stats);
  ASSERT_EQ(passages.size(), 2u);
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(passages[1].id, "f:2");
}

TEST(LoadSeed, RecordStreamWithWarnings) {
  TempDir dir;
  LoadStats stats;
  auto passages = load_seed(write(dir, "r.jsonl",
                                  "{\"text\":\"first\",\"id\":\"custom\"}\n"
                                  "{\"nope\":1}\n"
                                  "not json\n"
                                  "{\"text\":\"second\",\"source\":\"web\"}\n"),
                            SeedFormat::kRecordStream, "eng", &stats);
  ASSERT_EQ(passages.size(), 2u);
  EXPECT_EQ(passages[0].id, "custom");
  EXPECT_EQ(passages[1].id, "web:3");
  EXPECT_EQ(passages[1].source, "web");
  EXPECT_EQ(stats.skipped, 2u);
  EXPECT_EQ(stats.warnings.size(), 2u);
}

TEST(LoadSeed, InvalidUtf8IsSkipped) {
  TempDir dir;
  LoadStats stats;
  auto passages = load_seed(write(dir, "f.txt", std::string("ok\n\xC3\x28\n")), SeedFormat::kPlainLines,
                            "eng", &stats);
  EXPECT_EQ(passages.size(), 1u);
  EXPECT_EQ(stats.warnings.size(), 1u);
}

TEST(LoadSeed, MissingFileIsFatal) {
  EXPECT_THROW(load_seed("/nonexistent/seed.txt", SeedFormat::kPlainLines), IoError);
}

TEST(SamplingConfig, Validation) {
  SamplingConfig cfg;
  cfg.count = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.count = 1;
  cfg.min_chars = 10;
  cfg.max_chars = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

std::vector<SeedPassage> make_passages(std::size_t n) {
  std::vector<SeedPassage> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"p:" + std::to_string(i), "Passage number " + std::to_string(i) + " text.", "p", "eng"});
  }
  return out;
}

TEST(Sample, DeterministicForSeed) {
  auto pool = make_passages(100);
  SamplingConfig cfg;
  cfg.count = 10;
  cfg.rng_seed = 1;
  auto a = sample_passages(pool, cfg);
  auto b = sample_passages(pool, cfg);
  ASSERT_EQ(a.passages.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.passages[i].id, b.passages[i].id);
  EXPECT_TRUE(std::is_sorted(a.passages.begin(), a.passages.end(),
                             [](const auto& x, const auto& y) { return x.id < y.id; }));
  cfg.rng_seed = 2;
  auto c = sample_passages(pool, cfg);
  std::set<std::string> ia, ic;
  for (auto& p : a.passages) ia.insert(p.id);
  for (auto& p : c.passages) ic.insert(p.id);
  EXPECT_NE(ia, ic);
}

TEST(Sample, LengthBounds) {
  std::vector<SeedPassage> pool = {{"a", std::string(5, 'x'), "s", "eng"},
                                   {"b", std::string(50, 'x'), "s", "eng"},
                                   {"c", std::string(5000, 'x'), "s", "eng"}};
  SamplingConfig cfg;
  cfg.count = 3;
  cfg.min_chars = 10;
  cfg.max_chars = 1000;
  auto r = sample_passages(pool, cfg);
  ASSERT_EQ(r.passages.size(), 1u);
  EXPECT_EQ(r.passages[0].id, "b");
  EXPECT_EQ(r.rejected_length, 2u);
  EXPECT_EQ(r.shortfall(), 2u);
}

TEST(Sample, LengthIsMeasuredInScalars) {
  std::vector<SeedPassage> pool = {{"cjk", "日本語の文章です", "s", "eng"}};  // 8 scalars, 24 bytes
  SamplingConfig cfg;
  cfg.min_chars = 8;
  cfg.max_chars = 8;
  EXPECT_EQ(sample_passages(pool, cfg).passages.size(), 1u);
}

TEST(Sample, DedupReportsShortfall) {
  std::vector<SeedPassage> pool = {{"a", "Same text", "s", "eng"}, {"b", "  Same text ", "s", "eng"}};
  SamplingConfig cfg;
  cfg.count = 2;
  auto r = sample_passages(pool, cfg);
  EXPECT_EQ(r.passages.size(), 1u);
  EXPECT_EQ(r.duplicates, 1u);
  EXPECT_EQ(r.shortfall(), 1u);
  cfg.dedup = false;
  EXPECT_EQ(sample_passages(pool, cfg).passages.size(), 2u);
}

// Property: for random pools and configs the result has min(count, eligible)
// passages, all within bounds, with distinct texts under dedup.
TEST(Sample, PropertiesOverRandomPools) {
  Rng gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.below(60);
    std::vector<SeedPassage> pool;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text(1 + gen.below(40), static_cast<char>('a' + gen.below(3)));
      pool.push_back({"p:" + std::to_string(i), text, "p", "eng"});
    }
    SamplingConfig cfg;
    cfg.count = 1 + gen.below(20);
    cfg.rng_seed = gen.next();
    cfg.min_chars = gen.below(10);
    cfg.max_chars = cfg.min_chars + gen.below(30);
    cfg.dedup = gen.coin();
    auto r = sample_passages(pool, cfg);
    EXPECT_EQ(r.passages.size(), std::min(cfg.count, r.eligible));
    std::set<std::string> texts;
    for (const auto& p : r.passages) {
      const auto len = unicode::scalar_count(p.text);
      EXPECT_GE(len, cfg.min_chars);
      EXPECT_LE(len, cfg.max_chars);
      texts.insert(p.text);
    }
    if (cfg.dedup) {
      EXPECT_EQ(texts.size(), r.passages.size());
    }
  }
}

}  // namespace
}  // namespace xling::corpus
