// SPDX-License-Identifier: Apache-2.0
#include "xling/qe.h"

#include <optional>

#include "xling/digest.h"
#include "xling/unicode.h"

namespace xling::qe {
namespace {

Json canonical(const std::string& scorer_id, const QeRequest& r) {
  return {{"scorer", scorer_id},
          {"src", unicode::nfc(r.src)},
          {"mt", unicode::nfc(r.mt)},
          {"src_lang", r.src_lang},
          {"tgt_lang", r.tgt_lang}};
}

}  // namespace

Json request_body(std::span<const QeRequest> requests) {
  Json body = Json::array();
  for (const auto& r : requests) {
    body.push_back({{"src", r.src}, {"mt", r.mt}, {"src_lang", r.src_lang}, {"tgt_lang", r.tgt_lang}});
  }
  return body;
}

std::vector<double> parse_response(std::string_view body, std::size_t expected) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error&) {
    throw gateway::ProtocolError("QE response is not JSON", 1);
  }
  if (!doc.is_array() || doc.size() != expected) {
    throw gateway::ProtocolError("QE response must be an array of " + std::to_string(expected) +
                                     " scores",
                                 1);
  }
  std::vector<double> scores;
  scores.reserve(expected);
  for (const auto& v : doc) {
    if (!v.is_number()) throw gateway::ProtocolError("QE score is not a number", 1);
    const double x = v.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) {
      throw gateway::ProtocolError("QE score " + v.dump() + " outside [0, 1]", 1);
    }
    scores.push_back(x);
  }
  return scores;
}

QeScorer::QeScorer(gateway::Gateway& gateway, std::string scorer_id, std::string url,
                   std::size_t max_batch)
    : gateway_(gateway),
      scorer_id_(std::move(scorer_id)),
      url_(std::move(url)),
      max_batch_(max_batch == 0 ? 1 : max_batch) {}

Expected<QEScore> QeScorer::score(const QeRequest& request) {
  auto results = score_batch(std::span<const QeRequest>(&request, 1));
  return std::move(results.front());
}

std::vector<Expected<QEScore>> QeScorer::score_batch(std::span<const QeRequest> requests) {
  std::vector<std::optional<Expected<QEScore>>> slots(requests.size());
  std::vector<std::size_t> misses;
  std::vector<std::string> digests(requests.size());
  std::vector<Json> inputs(requests.size());

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    if (unicode::trim(r.src).empty() || unicode::trim(r.mt).empty()) {
      slots[i].emplace(ItemError{ItemErrorKind::kPrecondition, "QE needs non-empty source and hypothesis", 0});
      continue;
    }
    inputs[i] = canonical(scorer_id_, r);
    digests[i] = sha256_hex(dump_compact(inputs[i]));
    if (auto hit = gateway_.cache().get(scorer_id_, digests[i])) {
      try {
        slots[i].emplace(QEScore{Json::parse(*hit).get<double>(), scorer_id_});
        continue;
      } catch (const std::exception&) {
      }
    }
    misses.push_back(i);
  }

  for (std::size_t offset = 0; offset < misses.size(); offset += max_batch_) {
    const std::size_t count = std::min(max_batch_, misses.size() - offset);
    std::vector<QeRequest> chunk;
    chunk.reserve(count);
    for (std::size_t j = 0; j < count; ++j) chunk.push_back(requests[misses[offset + j]]);
    try {
      int attempts = 0;
      const auto body = gateway_.post_with_retry(url_, dump_compact(request_body(chunk)), {}, &attempts);
      std::vector<double> scores;
      try {
        scores = parse_response(body, count);
      } catch (const gateway::ProtocolError& e) {
        throw gateway::ProtocolError(e.what(), attempts);
      }
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = misses[offset + j];
        gateway_.cache().put(scorer_id_, digests[i], inputs[i], dump_compact(Json(scores[j])));
        slots[i].emplace(QEScore{scores[j], scorer_id_});
      }
    } catch (const gateway::GatewayError& e) {
      ItemError error = e.to_item_error();
      if (error.kind != ItemErrorKind::kProtocol) error.kind = ItemErrorKind::kQe;
      for (std::size_t j = 0; j < count; ++j) slots[misses[offset + j]].emplace(error);
    }
  }

  std::vector<Expected<QEScore>> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace xling::qe
