#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ctgi::chat {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role) noexcept;
Role parse_role(std::string_view name);

struct ChatMessage {
    Role role = Role::User;
    std::string text;
    /// Image id or file path the message refers to.
    std::optional<std::string> image_ref;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

inline ChatMessage user(std::string text, std::optional<std::string> image = std::nullopt)
{
    return {Role::User, std::move(text), std::move(image)};
}

inline ChatMessage assistant(std::string text) { return {Role::Assistant, std::move(text), std::nullopt}; }

/// Throws InvalidMessage when text is empty and there is no image.
void validate(const ChatMessage& m);

enum class BackendKind { Http, Scripted, Oracle, Replay };

std::string_view kind_name(BackendKind kind) noexcept;
BackendKind parse_kind(std::string_view name);

struct ChatBackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    std::optional<std::string> api_key;
    double temperature = 0.01;
    int max_retries = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds initial_backoff{500};
    /// Upper bound on concurrent in-flight requests to one backend.
    std::size_t max_in_flight = 4;
    /// Directory searched when an image_ref is not itself a file path.
    std::optional<std::filesystem::path> image_root;

    /// Throws UsageError if an http config lacks endpoint or model.
    void validate() const;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(std::span<const ChatMessage> messages) = 0;
    virtual std::string_view kind() const noexcept = 0;
};

struct Exchange {
    std::vector<ChatMessage> request;
    std::string response;
    std::string backend;
    std::string ts;

    friend bool operator==(const Exchange&, const Exchange&) = default;
};

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const Exchange& e);
void from_json(const nlohmann::json& j, Exchange& e);

std::string exchange_to_line(const Exchange& e);

/// Append-only exchange log. Appends are serialized; when recording, each
/// exchange is streamed to `<path>.partial` and the file is renamed onto
/// `path` by finish().
class Transcript {
public:
    /// Logical timestamps (epoch + exchange index seconds) keep transcripts
    /// from deterministic backends byte-identical across runs.
    enum class Clock { Wall, Logical };

    explicit Transcript(Clock clock = Clock::Wall);
    ~Transcript();

    Transcript(const Transcript&) = delete;
    Transcript& operator=(const Transcript&) = delete;

    void record_to(const std::filesystem::path& path);
    void finish();

    /// Stamps `ts` if empty, stores the exchange and streams it when recording.
    void append(Exchange e);
    void append_all(const std::vector<Exchange>& exchanges);

    std::vector<Exchange> exchanges() const;
    std::size_t size() const;

private:
    std::string stamp(std::size_t index) const;

    Clock clock_;
    mutable std::mutex mu_;
    std::vector<Exchange> exchanges_;
    std::optional<std::filesystem::path> path_;
    std::ofstream sink_;
};

std::vector<Exchange> load_transcript(const std::filesystem::path& path);

/// Front door for every model call: validates, forwards, logs.
class ChatGateway {
public:
    explicit ChatGateway(ChatBackend& backend, Transcript* transcript = nullptr)
        : backend_(&backend)
        , transcript_(transcript)
    {
    }

    std::string chat(std::span<const ChatMessage> messages);
    std::string chat(std::initializer_list<ChatMessage> messages)
    {
        return chat(std::span<const ChatMessage>(messages.begin(), messages.size()));
    }

    ChatBackend& backend() const noexcept { return *backend_; }
    Transcript* transcript() const noexcept { return transcript_; }

private:
    ChatBackend* backend_;
    Transcript* transcript_;
};

enum class YesNo { Affirmative, Negative, Ambiguous };

/// Classifies by the first alphabetic token, case-insensitively.
YesNo parse_yes_no(std::string_view reply);

/// Ambiguous replies count as negative at every decision point.
inline bool is_affirmative(std::string_view reply) { return parse_yes_no(reply) == YesNo::Affirmative; }

struct ScriptRule {
    /// Case-insensitive substring of the last user message.
    std::string contains;
    std::string reply;
};

/// Deterministic canned backend. Rules are checked first, in order; when no
/// rule matches the next queued reply is consumed; otherwise ScriptExhausted.
class ScriptedBackend final : public ChatBackend {
public:
    ScriptedBackend(std::vector<ScriptRule> rules, std::vector<std::string> replies = {});

    /// {"rules": [{"contains": str, "reply": str}...], "replies": [str...]}
    static std::unique_ptr<ScriptedBackend> load(const std::filesystem::path& path);

    std::string complete(std::span<const ChatMessage> messages) override;
    std::string_view kind() const noexcept override { return "scripted"; }

    std::size_t remaining() const;

private:
    std::vector<ScriptRule> rules_;
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    mutable std::mutex mu_;
};

/// Serves a recorded transcript back in order, verifying each request.
class ReplayBackend final : public ChatBackend {
public:
    explicit ReplayBackend(std::vector<Exchange> recorded);
    static std::unique_ptr<ReplayBackend> load(const std::filesystem::path& path);

    std::string complete(std::span<const ChatMessage> messages) override;
    std::string_view kind() const noexcept override { return "replay"; }

    std::size_t consumed() const;

private:
    std::vector<Exchange> recorded_;
    std::size_t next_ = 0;
    mutable std::mutex mu_;
};

} // namespace ctgi::chat
