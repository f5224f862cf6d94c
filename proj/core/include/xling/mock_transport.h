// SPDX-License-Identifier: Apache-2.0
//
// Deterministic offline backends behind mock:// URLs, for smoke runs and
// tests. Routing is by the first path component of the URL:
//   mock://teacher           reverse instruction / refinement
//   mock://translator/<v>    echoes the sentence with a variant-specific tag
//   mock://candidate/<v>     answers a prompt; longer variants answer longer
//   mock://judge             prefers the longer response; rubric score by hash
//   mock://qe/length-ratio   min/max of source and hypothesis lengths
//   mock://segmenter         sentences from the rule segmenter
//   mock://fail, mock://reject   always 500, always 400
// Parsing relies on the tag-wrapped placeholders of the bundled templates.
#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include "xling/gateway.h"

namespace xling::gateway {

class MockTransport final : public Transport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const Headers& headers) override;

  std::uint64_t calls() const { return calls_.load(); }

  // Exposed for tests.
  static std::string translate(std::string_view variant, std::string_view text);
  static double length_ratio(std::string_view src, std::string_view mt);

 private:
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace xling::gateway
