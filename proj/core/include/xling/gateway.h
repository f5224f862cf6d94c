// SPDX-License-Identifier: Apache-2.0
//
// Uniform client over chat-completion services. Every model call in the
// pipeline goes through Gateway, which adds content-addressed caching, retry
// with exponential backoff and full jitter, and bounded-concurrency batches.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/cache.h"
#include "xling/errors.h"
#include "xling/jsonl.h"
#include "xling/rng.h"

namespace xling::gateway {

enum class Role { kTeacher, kTranslator, kJudge, kCandidate, kPromptTranslator };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct ModelEndpoint {
  std::string model_id;
  std::string base_url;  // http(s)://host[:port][/prefix] or mock://<kind>[/<variant>]
  std::string auth_env;  // name of the env var holding a bearer token; may be empty
  Role role = Role::kCandidate;

  void validate() const;
};

// Defaults are the evaluation-time decoding settings.
struct GenerationParams {
  double temperature = 0.7;
  int max_tokens = 2048;
  std::vector<std::string> stop;

  void validate() const;
};

enum class MessageRole { kSystem, kUser, kAssistant };
std::string_view to_string(MessageRole role);

struct Message {
  MessageRole role = MessageRole::kUser;
  std::string content;
};

struct ChatRequest {
  ModelEndpoint endpoint;
  std::vector<Message> messages;
  GenerationParams params;

  // Throws PreconditionError unless messages are non-empty and end with a
  // user turn.
  void validate() const;
};

ChatRequest make_user_request(const ModelEndpoint& endpoint, std::string prompt,
                              const GenerationParams& params);

struct CacheKey {
  std::string digest;
  Json inputs;  // the canonical document the digest was computed over
};

// Canonical form: {"messages":[{"content":NFC,"role":...}],"model":...,
// "params":{"max_tokens":...,"stop":[...],"temperature":...}} serialized with
// sorted keys and no whitespace, then SHA-256. Content is not trimmed.
CacheKey make_cache_key(const ChatRequest& request);

// Wire body for POST <base_url>/chat/completions.
Json chat_request_body(const ChatRequest& request);

// Extracts choices[0].message.content. Throws ProtocolError.
std::string parse_chat_response(std::string_view body);

std::string chat_completions_url(const ModelEndpoint& endpoint);

struct HttpResponse {
  int status = 0;            // 0 when no response arrived
  std::string body;
  bool network_error = false;
  std::string error;         // transport diagnostic when network_error
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 const Headers& headers) = 0;
};

class GatewayError : public Error {
 public:
  GatewayError(ItemErrorKind kind, const std::string& what, int attempts)
      : Error(what), kind_(kind), attempts_(attempts) {}
  ItemErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }
  ItemError to_item_error() const { return {kind_, what(), attempts_}; }

 private:
  ItemErrorKind kind_;
  int attempts_;
};

class TransientFailure : public GatewayError {
 public:
  TransientFailure(const std::string& what, int attempts)
      : GatewayError(ItemErrorKind::kTransient, what, attempts) {}
};

class PermanentFailure : public GatewayError {
 public:
  PermanentFailure(const std::string& what, int attempts)
      : GatewayError(ItemErrorKind::kPermanent, what, attempts) {}
};

class ProtocolError : public GatewayError {
 public:
  ProtocolError(const std::string& what, int attempts)
      : GatewayError(ItemErrorKind::kProtocol, what, attempts) {}
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::milliseconds max_delay{60000};

  void validate() const;
  // Upper bound of the jitter window before attempt `attempt + 1`.
  std::chrono::milliseconds ceiling(int attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct Completion {
  std::string text;
  int attempts = 0;  // 0 on a cache hit
  bool cached = false;
};

struct GatewayStats {
  std::uint64_t backend_calls = 0;  // transport invocations, retries included
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Transport> transport, std::shared_ptr<CacheStore> cache,
          RetryPolicy retry = {}, std::uint64_t jitter_seed = 0);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  // Thread-safe. Throws TransientFailure, PermanentFailure, ProtocolError or
  // PreconditionError.
  Completion complete(const ChatRequest& request);

  // Results are in input order; per-item failures never abort the batch.
  std::vector<Expected<Completion>> complete_batch(std::span<const ChatRequest> requests,
                                                   std::size_t max_in_flight);

  // POST with the retry policy applied; returns the 2xx body. Used by
  // non-chat services such as the QE scorer.
  std::string post_with_retry(const std::string& url, const std::string& body,
                              const Headers& headers, int* attempts = nullptr);

  CacheStore& cache() { return *cache_; }
  GatewayStats stats() const;

 private:
  std::chrono::milliseconds jitter(int attempt);

  std::shared_ptr<Transport> transport_;
  std::shared_ptr<CacheStore> cache_;
  RetryPolicy retry_;
  Sleeper sleeper_;
  std::mutex rng_mu_;
  Rng rng_;
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> cache_misses_{0};
};

Headers auth_headers(const ModelEndpoint& endpoint);

}  // namespace xling::gateway
