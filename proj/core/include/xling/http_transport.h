// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "xling/gateway.h"

namespace xling::gateway {

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // always starts with '/'
};

// Throws ConfigError for anything but scheme://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(300));
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const Headers& headers) override;

 private:
  std::chrono::seconds timeout_;
};

// Sends mock:// URLs to `mock` and everything else to `http`.
class RoutingTransport final : public Transport {
 public:
  RoutingTransport(std::shared_ptr<Transport> http, std::shared_ptr<Transport> mock);
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const Headers& headers) override;

 private:
  std::shared_ptr<Transport> http_;
  std::shared_ptr<Transport> mock_;
};

}  // namespace xling::gateway
