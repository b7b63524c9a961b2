#include "symguide/endpoint/config.hpp"

#include <fstream>

#include "symguide/common/errors.hpp"

namespace symguide::endpoint {

using nlohmann::json;

json to_json(const ModelEndpointConfig& c) {
  return json{{"base_url", c.base_url},
              {"model_name", c.model_name},
              {"api_key_env", c.api_key_env},
              {"temperature", c.temperature},
              {"max_new_tokens", c.max_new_tokens},
              {"timeout_s", c.timeout_s},
              {"retry",
               {{"max_attempts", c.retry.max_attempts},
                {"initial_backoff_s", c.retry.initial_backoff_s},
                {"max_backoff_s", c.retry.max_backoff_s},
                {"multiplier", c.retry.multiplier}}},
              {"max_in_flight", c.max_in_flight},
              {"judge_scale", c.judge_scale}};
}

ModelEndpointConfig endpoint_config_from_json(const json& j) {
  ModelEndpointConfig c;
  try {
    c.base_url = j.at("base_url").get<std::string>();
    c.model_name = j.at("model_name").get<std::string>();
    c.api_key_env = j.value("api_key_env", "");
    c.temperature = j.value("temperature", c.temperature);
    c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.initial_backoff_s = r.value("initial_backoff_s", c.retry.initial_backoff_s);
      c.retry.max_backoff_s = r.value("max_backoff_s", c.retry.max_backoff_s);
      c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
    }
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.judge_scale = j.value("judge_scale", c.judge_scale);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("endpoint config: ") + e.what());
  }
  if (c.base_url.empty()) throw InvalidArgument("endpoint config: base_url is empty");
  if (c.max_new_tokens <= 0) throw InvalidArgument("endpoint config: max_new_tokens must be > 0");
  if (c.max_in_flight < 1 || c.max_in_flight > 1024) {
    throw InvalidArgument("endpoint config: max_in_flight must be in [1, 1024]");
  }
  if (c.retry.max_attempts < 1) throw InvalidArgument("endpoint config: retry.max_attempts < 1");
  if (c.judge_scale <= 0) throw InvalidArgument("endpoint config: judge_scale must be > 0");
  return c;
}

ModelEndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return endpoint_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

}  // namespace symguide::endpoint
