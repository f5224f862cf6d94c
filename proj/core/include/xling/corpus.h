// SPDX-License-Identifier: Apache-2.0
//
// Seed corpus ingestion and deterministic passage sampling.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xling::corpus {

struct SeedPassage {
  std::string id;
  std::string text;    // trimmed passage body
  std::string source;  // origin label, e.g. the corpus file stem
  std::string lang;
};

enum class SeedFormat {
  kPlainLines,    // one passage per line
  kRecordStream,  // one JSON object per line with a "text" field
};

// Accepts "plain-lines" and "record-stream". Throws ConfigError otherwise.
SeedFormat parse_seed_format(std::string_view name);

struct SamplingConfig {
  std::size_t count = 1;
  std::uint64_t rng_seed = 0;
  std::size_t min_chars = 1;  // Unicode scalar values, inclusive
  std::size_t max_chars = std::numeric_limits<std::size_t>::max();
  bool dedup = true;

  // Throws ConfigError when count == 0 or min_chars > max_chars.
  void validate() const;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t yielded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;  // one per malformed record
};

// Streams passages from a seed file in file order. Blank or malformed lines
// are skipped and counted; a malformed record also adds a warning. Ids are
// `<source>:<line>` with a zero-based line ordinal unless a record carries its
// own `id`.
class SeedReader {
 public:
  SeedReader(const std::filesystem::path& path, SeedFormat format, std::string lang = "eng",
             std::optional<std::string> source_label = std::nullopt);

  std::optional<SeedPassage> next();
  const LoadStats& stats() const { return stats_; }

 private:
  std::optional<SeedPassage> parse_line(std::string_view line, std::size_t ordinal);
  void warn(std::size_t ordinal, std::string_view why);

  std::filesystem::path path_;
  std::ifstream in_;
  SeedFormat format_;
  std::string lang_;
  std::string source_;
  std::size_t ordinal_ = 0;
  LoadStats stats_;
};

std::vector<SeedPassage> load_seed(const std::filesystem::path& path, SeedFormat format,
                                   std::string lang = "eng", LoadStats* stats = nullptr);

using PassageSource = std::function<std::optional<SeedPassage>()>;

struct SampleResult {
  std::vector<SeedPassage> passages;  // sorted by id
  std::size_t requested = 0;
  std::size_t seen = 0;
  std::size_t eligible = 0;
  std::size_t rejected_length = 0;
  std::size_t duplicates = 0;

  std::size_t shortfall() const {
    return requested > passages.size() ? requested - passages.size() : 0;
  }
};

// Reservoir sample over the eligible stream. Output depends only on the
// stream contents and cfg.
SampleResult sample_passages(const PassageSource& source, const SamplingConfig& cfg);
SampleResult sample_passages(SeedReader& reader, const SamplingConfig& cfg);
SampleResult sample_passages(std::span<const SeedPassage> passages, const SamplingConfig& cfg);

}  // namespace xling::corpus
