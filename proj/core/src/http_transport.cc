// SPDX-License-Identifier: Apache-2.0
#include "xling/http_transport.h"

#include <httplib.h>

#include <charconv>

namespace xling::gateway {

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  const auto sep = url.find("://");
  if (sep == std::string::npos) throw ConfigError("malformed URL '" + url + "'");
  out.scheme = url.substr(0, sep);
  const auto rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  if (const auto colon = authority.rfind(':'); colon != std::string::npos) {
    const auto port_text = authority.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), out.port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || out.port <= 0 ||
        out.port > 65535) {
      throw ConfigError("malformed port in URL '" + url + "'");
    }
    authority = authority.substr(0, colon);
  } else {
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (authority.empty()) throw ConfigError("URL '" + url + "' has no host");
  out.host = authority;
  return out;
}

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttpTransport::post_json(const std::string& url, const std::string& body,
                                      const Headers& headers) {
  const ParsedUrl parsed = parse_url(url);
  if (parsed.scheme != "http" && parsed.scheme != "https") {
    throw ConfigError("HttpTransport cannot serve scheme '" + parsed.scheme + "'");
  }
  httplib::Client client(parsed.scheme + "://" + parsed.host + ":" + std::to_string(parsed.port));
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers hdrs;
  for (const auto& [name, value] : headers) hdrs.emplace(name, value);

  HttpResponse out;
  auto result = client.Post(parsed.path, hdrs, body, "application/json");
  if (!result) {
    out.network_error = true;
    out.error = httplib::to_string(result.error());
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

RoutingTransport::RoutingTransport(std::shared_ptr<Transport> http, std::shared_ptr<Transport> mock)
    : http_(std::move(http)), mock_(std::move(mock)) {}

HttpResponse RoutingTransport::post_json(const std::string& url, const std::string& body,
                                         const Headers& headers) {
  if (url.rfind("mock://", 0) == 0) {
    if (!mock_) throw ConfigError("no mock transport configured for " + url);
    return mock_->post_json(url, body, headers);
  }
  return http_->post_json(url, body, headers);
}

}  // namespace xling::gateway
