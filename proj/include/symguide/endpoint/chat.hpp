#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace symguide::endpoint {

struct ChatImage {
  std::string mime_type = "image/png";
  std::vector<std::uint8_t> bytes;
};

// Images are sent ahead of the text within a message.
struct ChatMessage {
  std::string role = "user";
  std::string text;
  std::vector<ChatImage> images;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
};

struct ChatResponse {
  std::string text;
  std::string raw;
};

// Anything that turns a chat request into a completion. Implementations must
// be safe to call from several threads at once.
class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// In-process endpoint backed by a function; used for mocks and replay.
class CallbackEndpoint : public ChatEndpoint {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit CallbackEndpoint(Handler handler) : handler_(std::move(handler)) {}
  ChatResponse complete(const ChatRequest& request) override {
    std::string text = handler_(request);
    return ChatResponse{text, text};
  }

 private:
  Handler handler_;
};

}  // namespace symguide::endpoint
