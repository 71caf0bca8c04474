#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pretex {

struct ChatMessage {
    std::string role;
    std::string content;
};

// A chat-completions style service: message list in, assistant text out.
// model_id() feeds the response cache key, so two clients with the same
// id must be interchangeable.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string model_id() const = 0;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;

    // Convenience for the common single-user-turn case.
    std::string ask(const std::string& prompt);
};

struct HttpClientConfig {
    std::string base_url;  // e.g. "http://localhost:8080/v1"
    std::string model;
    std::string api_key;  // empty = no Authorization header
    double temperature = 0.0;
    int max_retries = 3;
    int initial_backoff_ms = 250;
    int timeout_seconds = 120;
};

// POSTs {base_url}/chat/completions with a JSON body and reads
// choices[0].message.content. Retries transport failures and 5xx with
// exponential backoff, then throws TransportError.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpClientConfig config);

    std::string model_id() const override { return config_.model; }
    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    HttpClientConfig config_;
    std::string host_;  // scheme://authority
    std::string path_;  // path prefix + /chat/completions
};

// Directory-backed reply store keyed by (model id, prompt). Writes are
// atomic (temp file + rename) so concurrent writers of the same key
// land a complete record.
class ResponseCache {
public:
    explicit ResponseCache(std::string dir);

    static std::string cache_key(const std::string& model_id, const std::string& prompt);

    std::optional<std::string> lookup(const std::string& model_id, const std::string& prompt) const;
    void store(const std::string& model_id, const std::string& prompt, const std::string& reply);

    const std::string& dir() const { return dir_; }

private:
    std::string entry_path(const std::string& key) const;

    std::string dir_;
    mutable std::mutex mutex_;
};

// Cache-first wrapper around a client. Counts round trips that actually
// left the process, which is how resumability is audited.
class CachedChat {
public:
    CachedChat(std::shared_ptr<ChatClient> client, std::shared_ptr<ResponseCache> cache);

    std::string ask(const std::string& prompt);
    std::string model_id() const { return client_->model_id(); }

    uint64_t requests_sent() const;

private:
    std::shared_ptr<ChatClient> client_;
    std::shared_ptr<ResponseCache> cache_;  // may be null
    mutable std::mutex mutex_;
    uint64_t requests_sent_ = 0;
};

}  // namespace pretex
