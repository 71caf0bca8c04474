#include "pretex/chat.hpp"

#include "pretex/errors.hpp"
#include "pretex/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

namespace pretex {

using nlohmann::json;

std::string ChatClient::ask(const std::string& prompt) {
    return complete({{"user", prompt}});
}

namespace {

// Splits "scheme://host:port/prefix" into the authority httplib wants and
// the path prefix the request target needs.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL must include a scheme: " + base_url);
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
    if (config_.model.empty()) throw ConfigError("endpoint model name is empty");
    auto [host, prefix] = split_base_url(config_.base_url);
    host_ = host;
    path_ = prefix + "/chat/completions";
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    auto& msgs = body["messages"] = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    int backoff_ms = config_.initial_backoff_ms;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        // A fresh connection per attempt keeps this safe under the
        // bounded-parallel dispatcher.
        httplib::Client client(host_);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);

        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("endpoint " + host_ + path_ + " returned status " +
                                 std::to_string(res->status) + ": " + res->body);
        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed endpoint reply: ") + e.what());
        }
        if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
            throw TransportError("endpoint reply has no choices: " + res->body);
        const auto& choice = reply["choices"][0];
        if (!choice.contains("message") || !choice["message"].contains("content"))
            throw TransportError("endpoint reply has no message content: " + res->body);
        return choice["message"]["content"].get<std::string>();
    }
    throw TransportError("endpoint " + host_ + path_ + " failed after " +
                         std::to_string(config_.max_retries + 1) + " attempts (" + last_error + ")");
}

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::cache_key(const std::string& model_id, const std::string& prompt) {
    return sha256_hex(model_id + '\x1e' + prompt);
}

std::string ResponseCache::entry_path(const std::string& key) const {
    return dir_ + "/" + key + ".json";
}

std::optional<std::string> ResponseCache::lookup(const std::string& model_id,
                                                 const std::string& prompt) const {
    std::string path = entry_path(cache_key(model_id, prompt));
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json entry;
    try {
        in >> entry;
    } catch (const json::exception&) {
        return std::nullopt;  // torn or foreign file, treat as miss
    }
    if (!entry.contains("reply") || !entry["reply"].is_string()) return std::nullopt;
    return entry["reply"].get<std::string>();
}

void ResponseCache::store(const std::string& model_id, const std::string& prompt,
                          const std::string& reply) {
    json entry;
    entry["model"] = model_id;
    entry["prompt"] = prompt;
    entry["reply"] = reply;
    std::string path = entry_path(cache_key(model_id, prompt));
    std::lock_guard<std::mutex> lock(mutex_);
    write_file(path, entry.dump(2) + "\n");
}

CachedChat::CachedChat(std::shared_ptr<ChatClient> client, std::shared_ptr<ResponseCache> cache)
    : client_(std::move(client)), cache_(std::move(cache)) {
    if (!client_) throw ConfigError("CachedChat requires a client");
}

std::string CachedChat::ask(const std::string& prompt) {
    if (cache_) {
        if (auto hit = cache_->lookup(client_->model_id(), prompt)) return *hit;
    }
    std::string reply = client_->ask(prompt);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++requests_sent_;
    }
    if (cache_) cache_->store(client_->model_id(), prompt, reply);
    return reply;
}

uint64_t CachedChat::requests_sent() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_sent_;
}

}  // namespace pretex
