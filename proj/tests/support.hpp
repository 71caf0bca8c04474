#pragma once

// Shared helpers for the test binaries: fixture paths, throwaway
// directories, and canned chat backends.

#include "pretex/chat.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testsup {

inline std::string fixture_path(const std::string& name) {
    return std::string(PRETEX_FIXTURE_DIR) + "/" + name;
}

// Unique directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<uint64_t> counter{0};
        std::random_device rd;
        auto base = std::filesystem::temp_directory_path();
        path = base / ("pretex_test_" + std::to_string(rd()) + "_" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Scripted chat backend: returns canned replies in order, then repeats the
// last one. Records every prompt it saw.
class ScriptedChat : public pretex::ChatClient {
public:
    explicit ScriptedChat(std::vector<std::string> replies, std::string model = "stub")
        : replies_(std::move(replies)), model_(std::move(model)) {}

    std::string model_id() const override { return model_; }

    std::string complete(const std::vector<pretex::ChatMessage>& messages) override {
        prompts.push_back(messages.back().content);
        size_t i = prompts.size() - 1;
        if (replies_.empty()) return "";
        return replies_[i < replies_.size() ? i : replies_.size() - 1];
    }

    std::vector<std::string> prompts;

private:
    std::vector<std::string> replies_;
    std::string model_;
};

}  // namespace testsup
