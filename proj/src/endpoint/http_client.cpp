#include "symguide/endpoint/http_client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "symguide/common/errors.hpp"
#include "symguide/common/hashing.hpp"

namespace symguide::endpoint {

using nlohmann::json;

json build_wire_request(const ModelEndpointConfig& config, const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    if (m.images.empty()) {
      messages.push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    json parts = json::array();
    for (const auto& img : m.images) {
      parts.push_back({{"type", "image_url"},
                       {"image_url",
                        {{"url", "data:" + img.mime_type + ";base64," + base64_encode(img.bytes)}}}});
    }
    parts.push_back({{"type", "text"}, {"text", m.text}});
    messages.push_back({{"role", m.role}, {"content", parts}});
  }
  return json{{"model", config.model_name},
              {"temperature", config.temperature},
              {"max_tokens", config.max_new_tokens},
              {"messages", messages}};
}

std::string parse_wire_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw EndpointError(std::string("response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw EndpointError("response has no choices");
  }
  const auto& msg = j["choices"][0].value("message", json::object());
  const auto content = msg.value("content", json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  }
  throw EndpointError("response message has no text content");
}

UrlParts split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("base_url lacks a scheme: " + base_url);
  const auto scheme = base_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw InvalidArgument("unsupported scheme in base_url: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string::npos) {
    parts.scheme_host_port = base_url;
  } else {
    parts.scheme_host_port = base_url.substr(0, path_start);
    parts.path_prefix = base_url.substr(path_start);
  }
  while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/') parts.path_prefix.pop_back();
  return parts;
}

double backoff_delay(const RetryPolicy& policy, int attempt) {
  return std::min(policy.max_backoff_s,
                  policy.initial_backoff_s * std::pow(policy.multiplier, attempt));
}

HttpChatClient::HttpChatClient(ModelEndpointConfig config, Sleeper sleeper,
                               std::uint64_t jitter_seed)
    : config_(std::move(config)),
      url_(split_base_url(config_.base_url)),
      sleeper_(std::move(sleeper)),
      in_flight_(config_.max_in_flight),
      jitter_rng_(jitter_seed) {
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
  if (!sleeper_) {
    sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  }
}

double HttpChatClient::jittered(double delay) {
  std::lock_guard lock(jitter_mutex_);
  return delay * (0.5 + 0.5 * jitter_rng_.unit());
}

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::optional<double> retry_after(const httplib::Result& res) {
  if (!res || !res->has_header("Retry-After")) return std::nullopt;
  try {
    return std::stod(res->get_header_value("Retry-After"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  const std::string body = build_wire_request(config_, request).dump();
  const std::string path = url_.path_prefix + "/chat/completions";

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(url_.scheme_host_port);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  std::string last_error;
  for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      return ChatResponse{parse_wire_response(res->body), res->body};
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      if (!retryable_status(res->status)) break;
    }
    if (attempt + 1 < config_.retry.max_attempts) {
      double delay = jittered(backoff_delay(config_.retry, attempt));
      if (auto hint = retry_after(res)) delay = std::max(delay, *hint);
      sleeper_(delay);
    }
  }
  throw EndpointError(config_.model_name + " at " + config_.base_url + ": " + last_error);
}

}  // namespace symguide::endpoint
