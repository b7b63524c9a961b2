#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace symguide::endpoint {

struct RetryPolicy {
  int max_attempts = 4;
  double initial_backoff_s = 0.5;
  double max_backoff_s = 16.0;
  double multiplier = 2.0;

  bool operator==(const RetryPolicy&) const = default;
};

// Connection settings for an OpenAI-compatible chat-completions service.
// `api_key_env` names the environment variable holding the key; the key
// itself is never stored or serialized.
struct ModelEndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key_env;
  double temperature = 0.0;
  int max_new_tokens = 2048;
  double timeout_s = 120.0;
  RetryPolicy retry;
  int max_in_flight = 4;
  double judge_scale = 100.0;

  bool operator==(const ModelEndpointConfig&) const = default;
};

nlohmann::json to_json(const ModelEndpointConfig& config);
ModelEndpointConfig endpoint_config_from_json(const nlohmann::json& j);
ModelEndpointConfig load_endpoint_config(const std::filesystem::path& path);

}  // namespace symguide::endpoint
