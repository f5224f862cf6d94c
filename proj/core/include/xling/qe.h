// SPDX-License-Identifier: Apache-2.0
//
// Client for a reference-free translation quality estimation service.
// Wire shape: POST a JSON array of {src, mt, src_lang, tgt_lang}; the reply
// is a parallel array of numbers in [0, 1].
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xling/errors.h"
#include "xling/gateway.h"

namespace xling::qe {

struct QeRequest {
  std::string src;
  std::string mt;
  std::string src_lang;
  std::string tgt_lang;
};

struct QEScore {
  double value = 0.0;
  std::string scorer_id;
};

Json request_body(std::span<const QeRequest> requests);

// Throws gateway::ProtocolError unless the body is an array of `expected`
// numbers, each within [0, 1].
std::vector<double> parse_response(std::string_view body, std::size_t expected);

class QeScorer {
 public:
  // Scores are cached in the gateway's store under the scorer id.
  QeScorer(gateway::Gateway& gateway, std::string scorer_id, std::string url,
           std::size_t max_batch = 64);

  Expected<QEScore> score(const QeRequest& request);

  // One result per request, same order. Cached entries are served locally and
  // the misses go out in chunks of at most max_batch.
  std::vector<Expected<QEScore>> score_batch(std::span<const QeRequest> requests);

  const std::string& scorer_id() const { return scorer_id_; }

 private:
  gateway::Gateway& gateway_;
  std::string scorer_id_;
  std::string url_;
  std::size_t max_batch_;
};

}  // namespace xling::qe
