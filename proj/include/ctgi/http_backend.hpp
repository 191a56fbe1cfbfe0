#pragma once

#include "ctgi/chat.hpp"

#include <semaphore>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace ctgi::chat {

/// OpenAI-compatible chat-completions request body. A pure function of its
/// arguments (plus the bytes of any referenced image files).
nlohmann::json build_request_body(const ChatBackendConfig& config, std::span<const ChatMessage> messages);

/// Assistant text from a chat-completions response body.
std::string parse_response_body(const std::string& body);

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/chat/completions
};

Endpoint split_endpoint(const std::string& url);

/// Live backend. Transport failures are retried with exponential backoff up
/// to max_retries; non-2xx replies surface immediately as BackendRejected.
class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(ChatBackendConfig config);

    std::string complete(std::span<const ChatMessage> messages) override;
    std::string_view kind() const noexcept override { return "http"; }

    const ChatBackendConfig& config() const noexcept { return config_; }

private:
    ChatBackendConfig config_;
    Endpoint endpoint_;
    std::counting_semaphore<1024> in_flight_;
};

} // namespace ctgi::chat
