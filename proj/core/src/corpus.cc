// SPDX-License-Identifier: Apache-2.0
#include "xling/corpus.h"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "xling/digest.h"
#include "xling/errors.h"
#include "xling/rng.h"
#include "xling/unicode.h"

namespace xling::corpus {

SeedFormat parse_seed_format(std::string_view name) {
  if (name == "plain-lines") return SeedFormat::kPlainLines;
  if (name == "record-stream") return SeedFormat::kRecordStream;
  throw ConfigError("unknown seed format '" + std::string(name) +
                    "' (expected plain-lines or record-stream)");
}

void SamplingConfig::validate() const {
  if (count < 1) throw ConfigError("sampling count must be >= 1");
  if (min_chars > max_chars) throw ConfigError("sampling min_chars exceeds max_chars");
}

SeedReader::SeedReader(const std::filesystem::path& path, SeedFormat format, std::string lang,
                       std::optional<std::string> source_label)
    : path_(path), in_(path, std::ios::binary), format_(format), lang_(std::move(lang)) {
  if (!in_ || std::filesystem::is_directory(path)) {
    throw IoError("cannot read seed corpus " + path.string());
  }
  source_ = source_label ? *source_label : path.stem().string();
}

void SeedReader::warn(std::size_t ordinal, std::string_view why) {
  stats_.warnings.push_back(path_.string() + ":" + std::to_string(ordinal + 1) + ": " +
                            std::string(why));
}

std::optional<SeedPassage> SeedReader::parse_line(std::string_view line, std::size_t ordinal) {
  if (!unicode::is_valid_utf8(line)) {
    warn(ordinal, "invalid UTF-8");
    return std::nullopt;
  }
  SeedPassage passage;
  passage.lang = lang_;
  passage.source = source_;
  if (format_ == SeedFormat::kPlainLines) {
    auto text = unicode::trim(line);
    if (text.empty()) return std::nullopt;
    passage.text = std::string(text);
    passage.id = source_ + ":" + std::to_string(ordinal);
    return passage;
  }

  if (unicode::trim(line).empty()) return std::nullopt;
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    warn(ordinal, "malformed JSON record");
    return std::nullopt;
  }
  if (!record.is_object() || !record.contains("text") || !record["text"].is_string()) {
    warn(ordinal, "record has no string field 'text'");
    return std::nullopt;
  }
  auto text = unicode::trim(record["text"].get_ref<const std::string&>());
  if (text.empty()) {
    warn(ordinal, "record text is empty");
    return std::nullopt;
  }
  passage.text = std::string(text);
  if (auto it = record.find("source"); it != record.end() && it->is_string()) {
    passage.source = it->get<std::string>();
  }
  if (auto it = record.find("id"); it != record.end() && (it->is_string() || it->is_number_integer())) {
    passage.id = it->is_string() ? it->get<std::string>() : std::to_string(it->get<long long>());
  } else {
    passage.id = passage.source + ":" + std::to_string(ordinal);
  }
  return passage;
}

std::optional<SeedPassage> SeedReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    const std::size_t ordinal = ordinal_++;
    ++stats_.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto passage = parse_line(line, ordinal)) {
      ++stats_.yielded;
      return passage;
    }
    ++stats_.skipped;
  }
  if (in_.bad()) throw IoError("read failed for " + path_.string());
  return std::nullopt;
}

std::vector<SeedPassage> load_seed(const std::filesystem::path& path, SeedFormat format,
                                   std::string lang, LoadStats* stats) {
  SeedReader reader(path, format, std::move(lang));
  std::vector<SeedPassage> out;
  while (auto passage = reader.next()) out.push_back(std::move(*passage));
  if (stats) *stats = reader.stats();
  return out;
}

SampleResult sample_passages(const PassageSource& source, const SamplingConfig& cfg) {
  cfg.validate();
  SampleResult result;
  result.requested = cfg.count;
  Rng rng(cfg.rng_seed);
  std::unordered_set<std::string> seen_texts;
  std::vector<SeedPassage> reservoir;
  reservoir.reserve(std::min<std::size_t>(cfg.count, 1 << 16));

  while (auto passage = source()) {
    ++result.seen;
    const std::size_t length = unicode::scalar_count(passage->text);
    if (length < cfg.min_chars || length > cfg.max_chars) {
      ++result.rejected_length;
      continue;
    }
    if (cfg.dedup) {
      auto key = sha256_hex(unicode::nfc(unicode::trim(passage->text)));
      if (!seen_texts.insert(std::move(key)).second) {
        ++result.duplicates;
        continue;
      }
    }
    const std::size_t index = result.eligible++;
    if (index < cfg.count) {
      reservoir.push_back(std::move(*passage));
    } else {
      const std::uint64_t slot = rng.below(index + 1);
      if (slot < cfg.count) reservoir[slot] = std::move(*passage);
    }
  }

  std::sort(reservoir.begin(), reservoir.end(),
            [](const SeedPassage& a, const SeedPassage& b) { return a.id < b.id; });
  result.passages = std::move(reservoir);
  return result;
}

SampleResult sample_passages(SeedReader& reader, const SamplingConfig& cfg) {
  return sample_passages(PassageSource([&reader] { return reader.next(); }), cfg);
}

SampleResult sample_passages(std::span<const SeedPassage> passages, const SamplingConfig& cfg) {
  std::size_t next = 0;
  return sample_passages(PassageSource([&]() -> std::optional<SeedPassage> {
                           if (next >= passages.size()) return std::nullopt;
                           return passages[next++];
                         }),
                         cfg);
}

}  // namespace xling::corpus
