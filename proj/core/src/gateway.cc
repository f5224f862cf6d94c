// SPDX-License-Identifier: Apache-2.0
#include "xling/gateway.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "xling/concurrency.h"
#include "xling/digest.h"
#include "xling/unicode.h"

namespace xling::gateway {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kTeacher:
      return "teacher";
    case Role::kTranslator:
      return "translator";
    case Role::kJudge:
      return "judge";
    case Role::kCandidate:
      return "candidate";
    case Role::kPromptTranslator:
      return "prompt-translator";
  }
  return "unknown";
}

Role parse_role(std::string_view name) {
  for (Role role : {Role::kTeacher, Role::kTranslator, Role::kJudge, Role::kCandidate,
                    Role::kPromptTranslator}) {
    if (to_string(role) == name) return role;
  }
  throw ConfigError("unknown endpoint role '" + std::string(name) + "'");
}

std::string_view to_string(MessageRole role) {
  switch (role) {
    case MessageRole::kSystem:
      return "system";
    case MessageRole::kUser:
      return "user";
    case MessageRole::kAssistant:
      return "assistant";
  }
  return "user";
}

void ModelEndpoint::validate() const {
  if (model_id.empty()) throw ConfigError("endpoint model_id is empty");
  const auto sep = base_url.find("://");
  if (sep == std::string::npos || sep + 3 >= base_url.size()) {
    throw ConfigError("endpoint '" + model_id + "' has malformed base_url '" + base_url + "'");
  }
  const auto scheme = std::string_view(base_url).substr(0, sep);
  if (scheme != "http" && scheme != "https" && scheme != "mock") {
    throw ConfigError("endpoint '" + model_id + "' uses unsupported scheme '" +
                      std::string(scheme) + "'");
  }
  if (base_url[sep + 3] == '/' || base_url[sep + 3] == ':') {
    throw ConfigError("endpoint '" + model_id + "' base_url has no host");
  }
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature must be in [0, 2]");
  }
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw PreconditionError("chat request has no messages");
  if (messages.back().role != MessageRole::kUser) {
    throw PreconditionError("chat request must end with a user message");
  }
}

ChatRequest make_user_request(const ModelEndpoint& endpoint, std::string prompt,
                              const GenerationParams& params) {
  ChatRequest request;
  request.endpoint = endpoint;
  request.messages.push_back({MessageRole::kUser, std::move(prompt)});
  request.params = params;
  return request;
}

namespace {

Json params_json(const GenerationParams& params) {
  return {{"temperature", params.temperature},
          {"max_tokens", params.max_tokens},
          {"stop", params.stop}};
}

}  // namespace

CacheKey make_cache_key(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", unicode::nfc(m.content)}});
  }
  Json inputs = {{"model", request.endpoint.model_id},
                 {"messages", std::move(messages)},
                 {"params", params_json(request.params)}};
  return {sha256_hex(dump_compact(inputs)), std::move(inputs)};
}

Json chat_request_body(const ChatRequest& request) {
  Json messages = Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  Json body = {{"model", request.endpoint.model_id},
               {"messages", std::move(messages)},
               {"temperature", request.params.temperature},
               {"max_tokens", request.params.max_tokens}};
  if (!request.params.stop.empty()) body["stop"] = request.params.stop;
  return body;
}

std::string parse_chat_response(std::string_view body) {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what(), 1);
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProtocolError("message content is not a string", 1);
    return content.get<std::string>();
  } catch (const Json::exception&) {
    throw ProtocolError("response lacks choices[0].message.content", 1);
  }
}

std::string chat_completions_url(const ModelEndpoint& endpoint) {
  std::string url = endpoint.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url + "/chat/completions";
}

Headers auth_headers(const ModelEndpoint& endpoint) {
  Headers headers;
  if (!endpoint.auth_env.empty()) {
    if (const char* token = std::getenv(endpoint.auth_env.c_str()); token && *token) {
      headers.emplace_back("Authorization", std::string("Bearer ") + token);
    }
  }
  return headers;
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
  if (base_delay.count() < 0 || max_delay.count() < 0) throw ConfigError("retry delays must be >= 0");
  if (factor < 1.0) throw ConfigError("retry factor must be >= 1");
}

std::chrono::milliseconds RetryPolicy::ceiling(int attempt) const {
  const double raw = static_cast<double>(base_delay.count()) * std::pow(factor, attempt - 1);
  const double capped = std::min(raw, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

Gateway::Gateway(std::shared_ptr<Transport> transport, std::shared_ptr<CacheStore> cache,
                 RetryPolicy retry, std::uint64_t jitter_seed)
    : transport_(std::move(transport)),
      cache_(cache ? std::move(cache) : std::make_shared<NullCache>()),
      retry_(retry),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      rng_(jitter_seed) {
  retry_.validate();
}

std::chrono::milliseconds Gateway::jitter(int attempt) {
  const auto ceiling = retry_.ceiling(attempt);
  if (ceiling.count() <= 0) return ceiling;
  std::lock_guard lock(rng_mu_);
  return std::chrono::milliseconds(
      static_cast<long long>(rng_.below(static_cast<std::uint64_t>(ceiling.count()) + 1)));
}

std::string Gateway::post_with_retry(const std::string& url, const std::string& body,
                                     const Headers& headers, int* attempts_out) {
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (attempts_out) *attempts_out = attempt;
    backend_calls_.fetch_add(1);
    HttpResponse response = transport_->post_json(url, body, headers);
    if (!response.network_error && response.status >= 200 && response.status < 300) {
      return std::move(response.body);
    }
    const bool retryable =
        response.network_error || response.status == 429 || response.status >= 500;
    last_error = response.network_error
                     ? "network error: " + response.error
                     : "HTTP " + std::to_string(response.status) + " from " + url;
    if (!retryable) throw PermanentFailure(last_error, attempt);
    if (attempt < retry_.max_attempts) sleeper_(jitter(attempt));
  }
  throw TransientFailure(
      "retries exhausted after " + std::to_string(retry_.max_attempts) + " attempts: " + last_error,
      retry_.max_attempts);
}

Completion Gateway::complete(const ChatRequest& request) {
  request.validate();
  const CacheKey key = make_cache_key(request);
  const std::string& space = request.endpoint.model_id;
  if (auto hit = cache_->get(space, key.digest)) {
    cache_hits_.fetch_add(1);
    return {std::move(*hit), 0, true};
  }
  cache_misses_.fetch_add(1);

  int attempts = 0;
  const std::string body = post_with_retry(chat_completions_url(request.endpoint),
                                           dump_compact(chat_request_body(request)),
                                           auth_headers(request.endpoint), &attempts);
  std::string text;
  try {
    text = parse_chat_response(body);
  } catch (const ProtocolError& e) {
    throw ProtocolError(e.what(), attempts);
  }
  cache_->put(space, key.digest, key.inputs, text);
  return {std::move(text), attempts, false};
}

std::vector<Expected<Completion>> Gateway::complete_batch(std::span<const ChatRequest> requests,
                                                          std::size_t max_in_flight) {
  if (max_in_flight < 1) throw PreconditionError("max_in_flight must be >= 1");
  std::vector<std::optional<Expected<Completion>>> slots(requests.size());
  parallel_for(requests.size(), max_in_flight, [&](std::size_t i) {
    try {
      slots[i].emplace(complete(requests[i]));
    } catch (const GatewayError& e) {
      slots[i].emplace(e.to_item_error());
    } catch (const PreconditionError& e) {
      slots[i].emplace(ItemError{ItemErrorKind::kPrecondition, e.what(), 0});
    } catch (const std::exception& e) {
      slots[i].emplace(ItemError{ItemErrorKind::kPermanent, e.what(), 0});
    }
  });
  std::vector<Expected<Completion>> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

GatewayStats Gateway::stats() const {
  return {backend_calls_.load(), cache_hits_.load(), cache_misses_.load()};
}

}  // namespace xling::gateway
