#include "ctgi/chat.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/text.hpp"

#include <cctype>
#include <ctime>

#include <nlohmann/json.hpp>

namespace ctgi::chat {

std::string_view role_name(Role role) noexcept
{
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view name)
{
    if (name == "system") return Role::System;
    if (name == "user") return Role::User;
    if (name == "assistant") return Role::Assistant;
    throw Error(Errc::ParseError, "unknown role '" + std::string(name) + "'");
}

void validate(const ChatMessage& m)
{
    if (m.text.empty() && !m.image_ref) {
        throw Error(Errc::InvalidMessage, "message text is empty and no image is attached");
    }
}

std::string_view kind_name(BackendKind kind) noexcept
{
    switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Replay: return "replay";
    }
    return "scripted";
}

BackendKind parse_kind(std::string_view name)
{
    if (name == "http") return BackendKind::Http;
    if (name == "scripted") return BackendKind::Scripted;
    if (name == "oracle") return BackendKind::Oracle;
    if (name == "replay") return BackendKind::Replay;
    throw Error(Errc::UsageError, "unknown backend kind '" + std::string(name) + "'");
}

void ChatBackendConfig::validate() const
{
    if (kind == BackendKind::Http && (!endpoint || endpoint->empty() || !model_name || model_name->empty())) {
        throw Error(Errc::UsageError, "http backend needs an endpoint and a model name");
    }
    if (temperature < 0.0) throw Error(Errc::UsageError, "temperature must be >= 0");
    if (max_retries < 0) throw Error(Errc::UsageError, "max_retries must be >= 0");
    if (max_in_flight == 0) throw Error(Errc::UsageError, "max_in_flight must be >= 1");
}

void to_json(nlohmann::json& j, const ChatMessage& m)
{
    j = nlohmann::json{{"role", role_name(m.role)}, {"text", m.text}};
    if (m.image_ref) j["image_ref"] = *m.image_ref;
}

void from_json(const nlohmann::json& j, ChatMessage& m)
{
    m.role = parse_role(j.at("role").get<std::string>());
    m.text = j.at("text").get<std::string>();
    if (j.contains("image_ref") && !j.at("image_ref").is_null()) {
        m.image_ref = j.at("image_ref").get<std::string>();
    } else {
        m.image_ref.reset();
    }
}

void to_json(nlohmann::json& j, const Exchange& e)
{
    j = nlohmann::json{{"request", e.request}, {"response", e.response}, {"backend", e.backend}, {"ts", e.ts}};
}

void from_json(const nlohmann::json& j, Exchange& e)
{
    j.at("request").get_to(e.request);
    j.at("response").get_to(e.response);
    j.at("backend").get_to(e.backend);
    e.ts = j.value("ts", std::string{});
}

std::string exchange_to_line(const Exchange& e)
{
    return nlohmann::json(e).dump();
}

Transcript::Transcript(Clock clock)
    : clock_(clock)
{
}

Transcript::~Transcript()
{
    try {
        finish();
    } catch (...) {
    }
}

void Transcript::record_to(const std::filesystem::path& path)
{
    std::lock_guard lock(mu_);
    auto partial = path;
    partial += ".partial";
    sink_.open(partial, std::ios::trunc);
    if (!sink_) throw Error(Errc::IOError, "cannot open " + partial.string());
    path_ = path;
    for (const auto& e : exchanges_) sink_ << exchange_to_line(e) << '\n';
    sink_.flush();
}

void Transcript::finish()
{
    std::lock_guard lock(mu_);
    if (!path_) return;
    sink_.close();
    auto partial = *path_;
    partial += ".partial";
    std::error_code ec;
    std::filesystem::rename(partial, *path_, ec);
    path_.reset();
    if (ec) throw Error(Errc::IOError, "cannot finalize transcript " + partial.string());
}

std::string Transcript::stamp(std::size_t index) const
{
    std::time_t t = clock_ == Clock::Logical ? static_cast<std::time_t>(index)
                                             : std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void Transcript::append(Exchange e)
{
    std::lock_guard lock(mu_);
    if (clock_ == Clock::Logical || e.ts.empty()) e.ts = stamp(exchanges_.size());
    if (path_) {
        sink_ << exchange_to_line(e) << '\n';
        sink_.flush();
        if (!sink_) throw Error(Errc::IOError, "transcript write failed");
    }
    exchanges_.push_back(std::move(e));
}

void Transcript::append_all(const std::vector<Exchange>& exchanges)
{
    for (const auto& e : exchanges) append(e);
}

std::vector<Exchange> Transcript::exchanges() const
{
    std::lock_guard lock(mu_);
    return exchanges_;
}

std::size_t Transcript::size() const
{
    std::lock_guard lock(mu_);
    return exchanges_.size();
}

std::vector<Exchange> load_transcript(const std::filesystem::path& path)
{
    std::vector<Exchange> out;
    const auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(lines[i]).get<Exchange>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string ChatGateway::chat(std::span<const ChatMessage> messages)
{
    if (messages.empty()) throw Error(Errc::InvalidMessage, "chat request has no messages");
    for (const auto& m : messages) validate(m);
    std::string reply = backend_->complete(messages);
    if (transcript_) {
        transcript_->append(Exchange{{messages.begin(), messages.end()}, reply, std::string(backend_->kind()), {}});
    }
    return reply;
}

YesNo parse_yes_no(std::string_view reply)
{
    std::string token;
    for (char c : reply) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!token.empty()) {
            break;
        }
    }
    if (token == "yes") return YesNo::Affirmative;
    if (token == "no") return YesNo::Negative;
    return YesNo::Ambiguous;
}

namespace {

const ChatMessage* last_user(std::span<const ChatMessage> messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::User) return &*it;
    }
    return nullptr;
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules, std::vector<std::string> replies)
    : rules_(std::move(rules))
    , replies_(std::move(replies))
{
    for (auto& r : rules_) r.contains = text::to_lower(r.contains);
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
        std::vector<ScriptRule> rules;
        for (const auto& r : j.value("rules", nlohmann::json::array())) {
            rules.push_back({r.at("contains").get<std::string>(), r.at("reply").get<std::string>()});
        }
        auto replies = j.value("replies", std::vector<std::string>{});
        return std::make_unique<ScriptedBackend>(std::move(rules), std::move(replies));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path.string() + ": " + e.what());
    }
}

std::string ScriptedBackend::complete(std::span<const ChatMessage> messages)
{
    const auto* msg = last_user(messages);
    const std::string lowered = msg ? text::to_lower(msg->text) : std::string{};
    for (const auto& r : rules_) {
        if (lowered.find(r.contains) != std::string::npos) return r.reply;
    }
    std::lock_guard lock(mu_);
    if (next_ < replies_.size()) return replies_[next_++];
    throw Error(Errc::ScriptExhausted, "no rule matches and the reply queue is empty");
}

std::size_t ScriptedBackend::remaining() const
{
    std::lock_guard lock(mu_);
    return replies_.size() - next_;
}

ReplayBackend::ReplayBackend(std::vector<Exchange> recorded)
    : recorded_(std::move(recorded))
{
}

std::unique_ptr<ReplayBackend> ReplayBackend::load(const std::filesystem::path& path)
{
    return std::make_unique<ReplayBackend>(load_transcript(path));
}

std::string ReplayBackend::complete(std::span<const ChatMessage> messages)
{
    std::lock_guard lock(mu_);
    if (next_ >= recorded_.size()) {
        throw Error(Errc::ScriptExhausted, "transcript exhausted after " + std::to_string(next_) + " exchanges");
    }
    const auto& expected = recorded_[next_];
    if (!std::equal(messages.begin(), messages.end(), expected.request.begin(), expected.request.end())) {
        throw Error(Errc::ReplayMismatch, "request differs from recorded exchange " + std::to_string(next_));
    }
    return recorded_[next_++].response;
}

std::size_t ReplayBackend::consumed() const
{
    std::lock_guard lock(mu_);
    return next_;
}

} // namespace ctgi::chat
