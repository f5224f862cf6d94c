// SPDX-License-Identifier: Apache-2.0
#include "xling/mock_transport.h"

#include <algorithm>
#include <optional>
#include <sstream>

#include "xling/digest.h"
#include "xling/envelope.h"
#include "xling/jsonl.h"
#include "xling/segment.h"
#include "xling/unicode.h"

namespace xling::gateway {

namespace {

HttpResponse ok_json(const Json& body) { return {200, dump_compact(body), false, ""}; }

HttpResponse chat_reply(const std::string& content) {
  return ok_json({{"choices", Json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})}});
}

HttpResponse error_reply(int status, const std::string& message) {
  return {status, dump_compact({{"error", {{"message", message}}}}), false, ""};
}

std::optional<std::string> between(std::string_view text, std::string_view open, std::string_view close) {
  auto b = text.find(open);
  if (b == std::string_view::npos) return std::nullopt;
  b += open.size();
  auto e = text.find(close, b);
  if (e == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(b, e - b));
}

std::string first_words(std::string_view text, std::size_t n) {
  std::istringstream in{std::string(text)};
  std::string word, out;
  for (std::size_t i = 0; i < n && in >> word; ++i) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  while (!out.empty() && std::string_view(".,;:!?\"'").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

std::string teacher(const std::string& prompt) {
  if (auto passage = between(prompt, "<passage>", "</passage>")) {
    return "INSTRUCTION: Write a short text that begins with \"" + first_words(*passage, 6) + "\".";
  }
  auto question = between(prompt, "<question>", "</question>");
  auto response = between(prompt, "<response>", "</response>");
  if (question && response) {
    return "QUESTION: " + std::string(unicode::trim(*question)) + "\nRESPONSE: " + *response;
  }
  return "I am not sure what to do with this request.";
}

std::string candidate(std::string_view variant, const std::string& prompt) {
  const std::string gist = first_words(prompt, 8);
  std::string out = "Here is my answer about " + gist + ".";
  const std::size_t extra = fnv1a64(std::string(variant) + "\x1f" + prompt) % 4;
  for (std::size_t i = 0; i < extra; ++i) out += " More detail follows.";
  if (variant == "empty") return "";
  return out;
}

std::string judge(const std::string& prompt) {
  auto a = between(prompt, "<response_a>", "</response_a>");
  auto b = between(prompt, "<response_b>", "</response_b>");
  if (a && b) {
    const auto la = unicode::scalar_count(*a);
    const auto lb = unicode::scalar_count(*b);
    if (la == lb) return "PREFERENCE: TIE";
    return la > lb ? "PREFERENCE: A" : "PREFERENCE: B";
  }
  if (auto response = between(prompt, "<response>", "</response>")) {
    const auto h = fnv1a64(prompt);
    return "Assessment done. SCORE: " + std::to_string(1 + h % 5);
  }
  return "No judgment possible.";
}

std::string last_user_message(const Json& body) {
  const auto& messages = body.at("messages");
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->value("role", "") == "user") return it->at("content").get<std::string>();
  }
  throw std::runtime_error("no user message");
}

}  // namespace

std::string MockTransport::translate(std::string_view variant, std::string_view text) {
  const std::size_t stars = fnv1a64(std::string(variant) + "\x1f" + std::string(text)) % 4;
  return std::string(text) + " [" + std::string(variant) + std::string(stars, '*') + "]";
}

double MockTransport::length_ratio(std::string_view src, std::string_view mt) {
  const double a = static_cast<double>(unicode::scalar_count(src));
  const double b = static_cast<double>(unicode::scalar_count(mt));
  if (a == 0.0 && b == 0.0) return 1.0;
  return std::min(a, b) / std::max(a, b);
}

HttpResponse MockTransport::post_json(const std::string& url, const std::string& body, const Headers&) {
  calls_.fetch_add(1);
  std::string_view rest(url);
  rest.remove_prefix(std::string_view("mock://").size());
  const std::string chat_suffix = "/chat/completions";
  if (rest.size() >= chat_suffix.size() && rest.substr(rest.size() - chat_suffix.size()) == chat_suffix) {
    rest.remove_suffix(chat_suffix.size());
  }
  while (!rest.empty() && rest.back() == '/') rest.remove_suffix(1);
  const auto slash = rest.find('/');
  const std::string kind(rest.substr(0, slash));
  const std::string variant = slash == std::string_view::npos ? "" : std::string(rest.substr(slash + 1));

  if (kind == "fail") return error_reply(500, "mock failure");
  if (kind == "reject") return error_reply(400, "mock rejection");

  Json request;
  try {
    request = Json::parse(body);
  } catch (const Json::parse_error&) {
    return error_reply(400, "body is not JSON");
  }
  try {
    if (kind == "qe") {
      Json scores = Json::array();
      for (const auto& row : request) {
        scores.push_back(length_ratio(row.at("src").get<std::string>(), row.at("mt").get<std::string>()));
      }
      return ok_json(scores);
    }
    if (kind == "segmenter") {
      const auto text = request.at("text").get<std::string>();
      return ok_json({{"sentences", translation::segment(text).sentences()}});
    }
    const std::string prompt = last_user_message(request);
    if (kind == "teacher") return chat_reply(teacher(prompt));
    if (kind == "translator") {
      const auto split = prompt.find("\n\n");
      const std::string text(unicode::trim(split == std::string::npos ? std::string_view(prompt)
                                                                       : std::string_view(prompt).substr(split + 2)));
      return chat_reply(translate(variant.empty() ? "mt" : variant, text));
    }
    if (kind == "candidate") return chat_reply(candidate(variant, prompt));
    if (kind == "judge") return chat_reply(judge(prompt));
  } catch (const std::exception& e) {
    return error_reply(400, std::string("malformed mock request: ") + e.what());
  }
  return error_reply(404, "unknown mock backend '" + kind + "'");
}

}  // namespace xling::gateway
