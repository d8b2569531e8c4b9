#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promodel/error.hpp"
#include "promodel/prompting/chat.hpp"

namespace promodel::orchestrator {

using prompting::ChatMessage;
using prompting::History;

struct ProviderSettings {
    std::string model = "gpt-4";
    double temperature = 0.3;
    std::size_t max_tokens = 4096;
    std::chrono::milliseconds timeout{120000};
};

// Cooperative cancellation shared between a caller and a running turn.
class CancelToken {
public:
    void cancel() { flag_->store(true); }
    bool cancelled() const { return flag_->load(); }

private:
    std::shared_ptr<std::atomic<bool>> flag_ = std::make_shared<std::atomic<bool>>(false);
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    // Returns the assistant's reply. Throws Error(ProviderFailure) on
    // transport problems, timeouts or an exhausted script.
    virtual std::string send(const History& history, const ProviderSettings& settings) = 0;

    virtual bool supports_system_role() const { return true; }
};

// Answers from a fixed list, or from a callback that sees the history.
class ScriptedProvider : public LlmProvider {
public:
    using Script = std::function<std::string(const History&, std::size_t call)>;

    explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
    explicit ScriptedProvider(Script script) : script_(std::move(script)) {}

    std::string send(const History& history, const ProviderSettings&) override {
        std::lock_guard lock(mutex_);
        const auto call = calls_++;
        seen_.push_back(history);
        if (script_) {
            return script_(history, call);
        }
        if (call >= responses_.size()) {
            throw Error(ErrorCode::ProviderFailure,
                        "scripted provider exhausted after " + std::to_string(responses_.size()) + " responses");
        }
        return responses_[call];
    }

    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }

    // Histories as they were sent, one per call.
    std::vector<History> seen() const {
        std::lock_guard lock(mutex_);
        return seen_;
    }

private:
    std::vector<std::string> responses_;
    Script script_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
    std::vector<History> seen_;
};

// Replays recorded responses: the files of `dir` whose names start with a
// number (001.txt, 2-response.md, ...), in numeric order.
class ReplayProvider : public LlmProvider {
public:
    explicit ReplayProvider(const std::filesystem::path& dir) : dir_(dir) {
        if (!std::filesystem::is_directory(dir)) {
            throw Error(ErrorCode::ProviderFailure, "replay directory " + dir.string() + " does not exist");
        }
        static const std::regex numbered(R"((\d+).*)");
        std::vector<std::pair<long, std::filesystem::path>> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            std::smatch match;
            const auto name = entry.path().filename().string();
            if (entry.is_regular_file() && std::regex_match(name, match, numbered)) {
                files.emplace_back(std::stol(match[1]), entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& [_, path] : files) {
            std::ifstream in(path, std::ios::binary);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            responses_.push_back(buffer.str());
        }
    }

    std::string send(const History&, const ProviderSettings&) override {
        std::lock_guard lock(mutex_);
        if (next_ >= responses_.size()) {
            throw Error(ErrorCode::ProviderFailure, "replay fixture " + dir_.string() + " exhausted after " +
                                                        std::to_string(responses_.size()) + " responses");
        }
        return responses_[next_++];
    }

    std::size_t size() const { return responses_.size(); }

    std::size_t consumed() const {
        std::lock_guard lock(mutex_);
        return next_;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::string> responses_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
};

struct Endpoint {
    std::string scheme; // http or https
    std::string host;
    int port = 0;
    std::string path;
};

inline Endpoint parse_endpoint(const std::string& url) {
    static const std::regex pattern(R"((https?)://([^/:]+)(?::(\d+))?(/.*)?)");
    std::smatch match;
    if (!std::regex_match(url, match, pattern)) {
        throw Error(ErrorCode::ConfigError, "invalid endpoint URL '" + url + "'");
    }
    Endpoint e{match[1], match[2], 0, match[4].matched ? std::string(match[4]) : "/"};
    e.port = match[3].matched ? std::stoi(match[3]) : (e.scheme == "https" ? 443 : 80);
    return e;
}

// Chat-completions client: POST {model, messages, temperature, max_tokens},
// reply text from choices[0].message.content. Rate limits and server errors
// are retried with a short backoff.
class HttpProvider : public LlmProvider {
public:
    HttpProvider(std::string url, std::string api_key, std::size_t retries = 2,
                 std::chrono::milliseconds backoff = std::chrono::milliseconds(1000))
        : endpoint_(parse_endpoint(url)), api_key_(std::move(api_key)), retries_(retries), backoff_(backoff) {}

    std::string send(const History& history, const ProviderSettings& settings) override {
        nlohmann::json body{{"model", settings.model},
                            {"messages", prompting::to_json(history)},
                            {"temperature", settings.temperature},
                            {"max_tokens", settings.max_tokens}};
        const auto payload = body.dump();
        for (std::size_t attempt = 0;; ++attempt) {
            const auto result = post(payload, settings.timeout);
            if (!result) {
                fail("request to " + endpoint_.host + " failed: " + httplib::to_string(result.error()));
            }
            const bool retryable = result->status == 429 || result->status >= 500;
            if (retryable && attempt < retries_) {
                std::this_thread::sleep_for(backoff_ * (attempt + 1));
                continue;
            }
            if (result->status != 200) {
                fail("HTTP " + std::to_string(result->status) + " from " + endpoint_.host + ": " +
                     result->body.substr(0, 500));
            }
            return content(result->body);
        }
    }

private:
    [[noreturn]] static void fail(const std::string& message) { throw Error(ErrorCode::ProviderFailure, message); }

    httplib::Result post(const std::string& payload, std::chrono::milliseconds timeout) {
        httplib::Headers headers;
        if (!api_key_.empty()) {
            headers.emplace("Authorization", "Bearer " + api_key_);
        }
        const auto configure = [&](auto& client) {
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            return client.Post(endpoint_.path, headers, payload, "application/json");
        };
        if (endpoint_.scheme == "https") {
            httplib::SSLClient client(endpoint_.host, endpoint_.port);
            return configure(client);
        }
        httplib::Client client(endpoint_.host, endpoint_.port);
        return configure(client);
    }

    static std::string content(const std::string& body) {
        const auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded()) {
            fail("provider returned invalid JSON");
        }
        const auto* text = [&]() -> const nlohmann::json* {
            if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
                return nullptr;
            }
            const auto& choice = j["choices"][0];
            if (!choice.contains("message") || !choice["message"].contains("content")) {
                return nullptr;
            }
            return &choice["message"]["content"];
        }();
        if (!text || !text->is_string()) {
            fail("provider response has no choices[0].message.content");
        }
        return text->get<std::string>();
    }

    Endpoint endpoint_;
    std::string api_key_;
    std::size_t retries_;
    std::chrono::milliseconds backoff_;
};

} // namespace promodel::orchestrator
