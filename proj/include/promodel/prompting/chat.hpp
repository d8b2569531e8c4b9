#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promodel/error.hpp"

namespace promodel::prompting {

enum class Author { System, User, Assistant };

constexpr std::string_view to_string(Author author) {
    switch (author) {
    case Author::System: return "system";
    case Author::User: return "user";
    case Author::Assistant: return "assistant";
    }
    return "user";
}

inline Author author_from_string(std::string_view text) {
    if (text == "system") {
        return Author::System;
    }
    if (text == "user") {
        return Author::User;
    }
    if (text == "assistant") {
        return Author::Assistant;
    }
    throw Error(ErrorCode::SchemaError, "unknown message author '" + std::string(text) + "'");
}

struct ChatMessage {
    Author author = Author::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

using History = std::vector<ChatMessage>;

inline nlohmann::json to_json(const ChatMessage& message) {
    return {{"role", std::string(to_string(message.author))}, {"content", message.content}};
}

inline ChatMessage message_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("role") || !j.contains("content") || !j["role"].is_string() ||
        !j["content"].is_string()) {
        throw Error(ErrorCode::SchemaError, "a chat message needs string fields 'role' and 'content'");
    }
    return {author_from_string(j["role"].get<std::string>()), j["content"].get<std::string>()};
}

inline nlohmann::json to_json(const History& history) {
    auto out = nlohmann::json::array();
    for (const auto& message : history) {
        out.push_back(to_json(message));
    }
    return out;
}

} // namespace promodel::prompting
