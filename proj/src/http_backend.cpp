#include "ctgi/http_backend.hpp"

#include "ctgi/error.hpp"
#include "ctgi/io.hpp"

#include <algorithm>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

namespace ctgi::chat {

namespace {

std::string base64(const std::string& bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string mime_for(const std::filesystem::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") return "image/png";
    if (ext == ".webp") return "image/webp";
    if (ext == ".gif") return "image/gif";
    return "image/jpeg";
}

std::filesystem::path resolve_image(const ChatBackendConfig& config, const std::string& ref)
{
    namespace fs = std::filesystem;
    if (fs::is_regular_file(ref)) return ref;
    if (config.image_root) {
        const fs::path base = *config.image_root / ref;
        if (fs::is_regular_file(base)) return base;
        for (const char* ext : {".jpg", ".jpeg", ".png", ".webp"}) {
            auto candidate = base;
            candidate += ext;
            if (fs::is_regular_file(candidate)) return candidate;
        }
    }
    throw Error(Errc::UnknownImage, "cannot resolve image '" + ref + "'");
}

} // namespace

nlohmann::json build_request_body(const ChatBackendConfig& config, std::span<const ChatMessage> messages)
{
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        nlohmann::json entry{{"role", role_name(m.role)}};
        if (!m.image_ref) {
            entry["content"] = m.text;
        } else {
            nlohmann::json parts = nlohmann::json::array();
            if (!m.text.empty()) parts.push_back({{"type", "text"}, {"text", m.text}});
            const auto path = resolve_image(config, *m.image_ref);
            const auto url = "data:" + mime_for(path) + ";base64," + base64(io::read_file(path));
            parts.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
            entry["content"] = std::move(parts);
        }
        msgs.push_back(std::move(entry));
    }
    return nlohmann::json{
        {"model", config.model_name.value_or("")},
        {"temperature", config.temperature},
        {"messages", std::move(msgs)},
    };
}

std::string parse_response_body(const std::string& body)
{
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_string()) return content.get<std::string>();
        if (content.is_null()) return {};
        std::string out;
        for (const auto& part : content) {
            if (part.value("type", "") == "text") out += part.value("text", "");
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("malformed chat response: ") + e.what());
    }
}

Endpoint split_endpoint(const std::string& url)
{
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(Errc::UsageError, "endpoint needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, slash), url.substr(slash)};
}

HttpBackend::HttpBackend(ChatBackendConfig config)
    : config_(std::move(config))
    , in_flight_(static_cast<std::ptrdiff_t>(std::min<std::size_t>(config_.max_in_flight, 1024)))
{
    config_.validate();
    if (config_.kind != BackendKind::Http) throw Error(Errc::UsageError, "HttpBackend needs kind=http");
    endpoint_ = split_endpoint(*config_.endpoint);
}

std::string HttpBackend::complete(std::span<const ChatMessage> messages)
{
    const std::string body = build_request_body(config_, messages).dump();

    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    httplib::Client client(endpoint_.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (config_.api_key && !config_.api_key->empty()) {
        headers.emplace("Authorization", "Bearer " + *config_.api_key);
    }

    auto backoff = config_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        auto res = client.Post(endpoint_.path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error(Errc::BackendRejected, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
        }
        return parse_response_body(res->body);
    }
    throw Error(Errc::BackendUnreachable, endpoint_.base + endpoint_.path + " after "
                                              + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

} // namespace ctgi::chat
