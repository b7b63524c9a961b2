#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include "json.hpp"
#include "symguide/common/random.hpp"
#include "symguide/endpoint/chat.hpp"
#include "symguide/endpoint/config.hpp"

namespace symguide::endpoint {

// Request body in the chat-completions wire format. Images become base64
// data URLs.
nlohmann::json build_wire_request(const ModelEndpointConfig& config, const ChatRequest& request);

// Pulls choices[0].message.content out of a response body. Throws
// EndpointError on anything that is not a well-formed completion.
std::string parse_wire_response(const std::string& body);

struct UrlParts {
  std::string scheme_host_port;  // "https://api.example.com:443"
  std::string path_prefix;       // "/v1", possibly empty
};
UrlParts split_base_url(const std::string& base_url);

// Delay before retry number `attempt` (0-based), before jitter.
double backoff_delay(const RetryPolicy& policy, int attempt);

class HttpChatClient : public ChatEndpoint {
 public:
  using Sleeper = std::function<void(double seconds)>;

  explicit HttpChatClient(ModelEndpointConfig config, Sleeper sleeper = {},
                          std::uint64_t jitter_seed = 0x5eed);

  ChatResponse complete(const ChatRequest& request) override;
  const ModelEndpointConfig& config() const { return config_; }

 private:
  double jittered(double delay);

  ModelEndpointConfig config_;
  UrlParts url_;
  std::optional<std::string> api_key_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex jitter_mutex_;
  Rng jitter_rng_;
};

}  // namespace symguide::endpoint
