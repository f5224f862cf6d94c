// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace xling {

// Fatal errors abort the current command. Item-level failures are carried as
// ItemError values instead so a single bad record never stops a batch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

enum class ItemErrorKind {
  kTransient,    // retries exhausted
  kPermanent,    // non-retryable HTTP status
  kProtocol,     // malformed response body or out-of-range value
  kExtraction,   // labeled envelope missing from a completion
  kTranslation,  // every translation candidate failed
  kQe,           // quality estimation unavailable
  kPrecondition, // input violated an operation precondition
  kVerdict,      // judge output could not be parsed
};

std::string_view to_string(ItemErrorKind kind);

struct ItemError {
  ItemErrorKind kind = ItemErrorKind::kPermanent;
  std::string message;
  int attempts = 0;
};

// A value or an ItemError. Small on purpose: C++20 has no std::expected.
template <typename T>
class Expected {
 public:
  Expected(T value) : state_(std::in_place_index<0>, std::move(value)) {}
  Expected(ItemError error) : state_(std::in_place_index<1>, std::move(error)) {}

  bool has_value() const { return state_.index() == 0; }
  explicit operator bool() const { return has_value(); }

  T& value() & {
    check();
    return std::get<0>(state_);
  }
  const T& value() const& {
    check();
    return std::get<0>(state_);
  }
  T&& value() && {
    check();
    return std::get<0>(std::move(state_));
  }
  const ItemError& error() const { return std::get<1>(state_); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  void check() const {
    if (state_.index() != 0) {
      throw Error("Expected holds an error: " + std::get<1>(state_).message);
    }
  }

  std::variant<T, ItemError> state_;
};

}  // namespace xling
