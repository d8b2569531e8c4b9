#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "promodel/error.hpp"
#include "promodel/orchestrator/orchestrator.hpp"
#include "promodel/orchestrator/provider.hpp"

namespace promodel::service {

struct ServiceConfig {
    std::string provider_kind = "http"; // http | replay
    std::string provider_endpoint = "https://api.openai.com/v1/chat/completions";
    std::string provider_api_key_env = "OPENAI_API_KEY";
    std::string provider_model = "gpt-4";
    double provider_temperature = 0.3;
    long provider_timeout_ms = 120000;
    std::string replay_dir;
    std::size_t max_critical = 5;
    std::size_t max_adjustable = 2;
    std::string store_path; // empty: in-memory only
    std::string listen_address = "127.0.0.1:8080";
    std::string templates_dir = "templates";

    orchestrator::LoopConfig loop_config() const {
        orchestrator::LoopConfig loop;
        loop.max_critical_attempts = max_critical;
        loop.max_adjustable_attempts = max_adjustable;
        loop.settings.model = provider_model;
        loop.settings.temperature = provider_temperature;
        loop.settings.timeout = std::chrono::milliseconds(provider_timeout_ms);
        return loop;
    }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* section, const char* key, T& out) {
    if (!j.contains(section)) {
        return;
    }
    const auto& s = j[section];
    if (!s.is_object()) {
        throw Error(ErrorCode::ConfigError, std::string("configuration section '") + section + "' must be an object");
    }
    if (!s.contains(key)) {
        return;
    }
    try {
        out = s[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ConfigError, std::string("configuration key ") + section + "." + key + " has the wrong type");
    }
}

inline std::size_t parse_count(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const long value = std::stol(text, &used);
        if (used != text.size() || value < 0) {
            throw std::invalid_argument(text);
        }
        return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, what + " must be a non-negative integer, got '" + text + "'");
    }
}

} // namespace detail

// Applies a JSON document of the form
// {"provider": {"kind", "endpoint", "api_key_env", "model", "temperature", "timeout_ms", "replay_dir"},
//  "loop": {"max_critical", "max_adjustable"}, "store": {"path"}, "listen": {"address"},
//  "templates": {"dir"}} on top of `config`.
inline void apply_json(ServiceConfig& config, const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigError, "configuration must be a JSON object");
    }
    detail::read_key(j, "provider", "kind", config.provider_kind);
    detail::read_key(j, "provider", "endpoint", config.provider_endpoint);
    detail::read_key(j, "provider", "api_key_env", config.provider_api_key_env);
    detail::read_key(j, "provider", "model", config.provider_model);
    detail::read_key(j, "provider", "temperature", config.provider_temperature);
    detail::read_key(j, "provider", "timeout_ms", config.provider_timeout_ms);
    detail::read_key(j, "provider", "replay_dir", config.replay_dir);
    detail::read_key(j, "loop", "max_critical", config.max_critical);
    detail::read_key(j, "loop", "max_adjustable", config.max_adjustable);
    detail::read_key(j, "store", "path", config.store_path);
    detail::read_key(j, "listen", "address", config.listen_address);
    detail::read_key(j, "templates", "dir", config.templates_dir);
}

// PROMODEL_PROVIDER_KIND, PROMODEL_PROVIDER_ENDPOINT, PROMODEL_PROVIDER_MODEL,
// PROMODEL_REPLAY_DIR, PROMODEL_MAX_CRITICAL, PROMODEL_MAX_ADJUSTABLE,
// PROMODEL_STORE_PATH, PROMODEL_LISTEN_ADDRESS, PROMODEL_TEMPLATES_DIR.
inline void apply_environment(ServiceConfig& config,
                              const std::function<const char*(const char*)>& getenv = [](const char* name) {
                                  return std::getenv(name);
                              }) {
    const auto set = [&](const char* name, std::string& out) {
        if (const char* value = getenv(name)) {
            out = value;
        }
    };
    set("PROMODEL_PROVIDER_KIND", config.provider_kind);
    set("PROMODEL_PROVIDER_ENDPOINT", config.provider_endpoint);
    set("PROMODEL_PROVIDER_MODEL", config.provider_model);
    set("PROMODEL_REPLAY_DIR", config.replay_dir);
    set("PROMODEL_STORE_PATH", config.store_path);
    set("PROMODEL_LISTEN_ADDRESS", config.listen_address);
    set("PROMODEL_TEMPLATES_DIR", config.templates_dir);
    if (const char* value = getenv("PROMODEL_MAX_CRITICAL")) {
        config.max_critical = detail::parse_count(value, "PROMODEL_MAX_CRITICAL");
    }
    if (const char* value = getenv("PROMODEL_MAX_ADJUSTABLE")) {
        config.max_adjustable = detail::parse_count(value, "PROMODEL_MAX_ADJUSTABLE");
    }
}

inline void check(const ServiceConfig& config) {
    if (config.provider_kind != "http" && config.provider_kind != "replay") {
        throw Error(ErrorCode::ConfigError, "provider.kind must be 'http' or 'replay', got '" + config.provider_kind + "'");
    }
    if (config.provider_kind == "replay" && config.replay_dir.empty()) {
        throw Error(ErrorCode::ConfigError, "provider.replay_dir is required for the replay provider");
    }
    if (config.provider_kind == "http") {
        orchestrator::parse_endpoint(config.provider_endpoint);
    }
}

inline void apply_file(ServiceConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot read configuration file " + path);
    }
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::ConfigError, "configuration file " + path + " is not valid JSON");
    }
    apply_json(config, j);
}

// `base`, then the file (if given), then the environment.
inline ServiceConfig load_config(const std::string& path = {}, ServiceConfig base = {}) {
    ServiceConfig config = std::move(base);
    if (!path.empty()) {
        apply_file(config, path);
    }
    apply_environment(config);
    check(config);
    return config;
}

// Replay providers resume after the answers a conversation already holds,
// so a restored conversation continues where it stopped.
inline std::unique_ptr<orchestrator::LlmProvider> make_provider(const ServiceConfig& config,
                                                                std::size_t answered = 0) {
    if (config.provider_kind == "replay") {
        auto provider = std::make_unique<orchestrator::ReplayProvider>(config.replay_dir);
        for (std::size_t i = 0; i < answered; ++i) {
            try {
                provider->send({}, {});
            } catch (const Error&) {
                break;
            }
        }
        return provider;
    }
    const char* key = config.provider_api_key_env.empty() ? nullptr : std::getenv(config.provider_api_key_env.c_str());
    return std::make_unique<orchestrator::HttpProvider>(config.provider_endpoint, key ? key : "");
}

} // namespace promodel::service
