#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promodel/error.hpp"
#include "promodel/powl/json.hpp"
#include "promodel/powl/model.hpp"
#include "promodel/prompting/chat.hpp"

namespace promodel::orchestrator {

enum class Category { Critical, Adjustable };
enum class Stage { Provider, Extraction, Parse, Audit, Interpret, Validate, Convert };
enum class Status { InProgress, Succeeded, Failed };

constexpr std::string_view to_string(Category c) { return c == Category::Critical ? "Critical" : "Adjustable"; }

constexpr std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::Provider: return "Provider";
    case Stage::Extraction: return "Extraction";
    case Stage::Parse: return "Parse";
    case Stage::Audit: return "Audit";
    case Stage::Interpret: return "Interpret";
    case Stage::Validate: return "Validate";
    case Stage::Convert: return "Convert";
    }
    return "Unknown";
}

constexpr std::string_view to_string(Status s) {
    switch (s) {
    case Status::InProgress: return "InProgress";
    case Status::Succeeded: return "Succeeded";
    case Status::Failed: return "Failed";
    }
    return "Unknown";
}

struct Diagnostic {
    Category category = Category::Critical;
    Stage stage = Stage::Extraction;
    std::string kind; // e.g. ForbiddenImport, SharedSubmodel, Unsound
    std::string message;
    std::size_t attempt = 1; // provider call within the turn that produced it
    std::optional<std::size_t> line;
    bool auto_resolved = false;
    bool warning = false; // informational, did not block the turn
};

using Clock = std::chrono::system_clock;

struct Version {
    powl::PowlModel model;
    std::string code;
    std::vector<Diagnostic> diagnostics;
    Clock::time_point created_at;
};

enum class TurnKind { Generate, Feedback };

struct Turn {
    TurnKind kind = TurnKind::Generate;
    std::string input; // description or feedback text
    Status status = Status::InProgress;
    std::size_t provider_calls = 0;
    std::size_t critical_rounds = 0;
    std::size_t adjustable_rounds = 0;
    std::vector<Diagnostic> diagnostics;
    std::optional<std::size_t> version; // index into versions on success
};

struct Conversation {
    std::string id;
    std::string description;
    prompting::History history;
    std::vector<Version> versions;
    std::vector<Turn> turns;
    Status status = Status::InProgress;

    const Version* current() const { return versions.empty() ? nullptr : &versions.back(); }
};

inline nlohmann::json to_json(const Diagnostic& d) {
    nlohmann::json j{{"category", to_string(d.category)}, {"stage", to_string(d.stage)},
                     {"kind", d.kind},                    {"message", d.message},
                     {"attempt", d.attempt},              {"auto_resolved", d.auto_resolved},
                     {"warning", d.warning}};
    j["line"] = d.line ? nlohmann::json(*d.line) : nlohmann::json(nullptr);
    return j;
}

namespace detail {

template <typename E, std::size_t N>
E parse_enum(const nlohmann::json& j, const E (&values)[N]) {
    const auto text = j.get<std::string>();
    for (auto v : values) {
        if (to_string(v) == text) {
            return v;
        }
    }
    throw Error(ErrorCode::SchemaError, "unknown value '" + text + "'");
}

inline constexpr Category categories[] = {Category::Critical, Category::Adjustable};
inline constexpr Stage stages[] = {Stage::Provider, Stage::Extraction, Stage::Parse,   Stage::Audit,
                                   Stage::Interpret, Stage::Validate, Stage::Convert};
inline constexpr Status statuses[] = {Status::InProgress, Status::Succeeded, Status::Failed};

inline long long millis(Clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
}

} // namespace detail

inline Diagnostic diagnostic_from_json(const nlohmann::json& j) {
    Diagnostic d;
    d.category = detail::parse_enum(j.at("category"), detail::categories);
    d.stage = detail::parse_enum(j.at("stage"), detail::stages);
    d.kind = j.at("kind").get<std::string>();
    d.message = j.at("message").get<std::string>();
    d.attempt = j.at("attempt").get<std::size_t>();
    if (j.contains("line") && !j["line"].is_null()) {
        d.line = j["line"].get<std::size_t>();
    }
    d.auto_resolved = j.value("auto_resolved", false);
    d.warning = j.value("warning", false);
    return d;
}

inline nlohmann::json to_json(const Turn& t) {
    auto diagnostics = nlohmann::json::array();
    for (const auto& d : t.diagnostics) {
        diagnostics.push_back(to_json(d));
    }
    return {{"kind", t.kind == TurnKind::Generate ? "generate" : "feedback"},
            {"input", t.input},
            {"status", to_string(t.status)},
            {"provider_calls", t.provider_calls},
            {"critical_rounds", t.critical_rounds},
            {"adjustable_rounds", t.adjustable_rounds},
            {"diagnostics", diagnostics},
            {"version", t.version ? nlohmann::json(*t.version) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const Version& v, std::size_t index) {
    auto diagnostics = nlohmann::json::array();
    for (const auto& d : v.diagnostics) {
        diagnostics.push_back(to_json(d));
    }
    return {{"index", index},
            {"model", nlohmann::json::parse(powl::to_json(v.model))},
            {"code", v.code},
            {"diagnostics", diagnostics},
            {"created_at", detail::millis(v.created_at)}};
}

// Full state, including history; the service persists exactly this.
inline nlohmann::json to_json(const Conversation& c) {
    auto versions = nlohmann::json::array();
    for (std::size_t i = 0; i < c.versions.size(); ++i) {
        versions.push_back(to_json(c.versions[i], i));
    }
    auto turns = nlohmann::json::array();
    for (const auto& t : c.turns) {
        turns.push_back(to_json(t));
    }
    return {{"id", c.id},
            {"description", c.description},
            {"status", to_string(c.status)},
            {"history", prompting::to_json(c.history)},
            {"versions", versions},
            {"turns", turns}};
}

inline Conversation conversation_from_json(const nlohmann::json& j) {
    try {
        Conversation c;
        c.id = j.at("id").get<std::string>();
        c.description = j.at("description").get<std::string>();
        c.status = detail::parse_enum(j.at("status"), detail::statuses);
        for (const auto& m : j.at("history")) {
            c.history.push_back(prompting::message_from_json(m));
        }
        for (const auto& v : j.at("versions")) {
            Version version{powl::from_json(v.at("model").dump()), v.at("code").get<std::string>(), {},
                            Clock::time_point(std::chrono::milliseconds(v.at("created_at").get<long long>()))};
            for (const auto& d : v.at("diagnostics")) {
                version.diagnostics.push_back(diagnostic_from_json(d));
            }
            c.versions.push_back(std::move(version));
        }
        for (const auto& t : j.at("turns")) {
            Turn turn;
            turn.kind = t.at("kind").get<std::string>() == "generate" ? TurnKind::Generate : TurnKind::Feedback;
            turn.input = t.at("input").get<std::string>();
            turn.status = detail::parse_enum(t.at("status"), detail::statuses);
            turn.provider_calls = t.at("provider_calls").get<std::size_t>();
            turn.critical_rounds = t.at("critical_rounds").get<std::size_t>();
            turn.adjustable_rounds = t.at("adjustable_rounds").get<std::size_t>();
            for (const auto& d : t.at("diagnostics")) {
                turn.diagnostics.push_back(diagnostic_from_json(d));
            }
            if (!t.at("version").is_null()) {
                turn.version = t["version"].get<std::size_t>();
            }
            c.turns.push_back(std::move(turn));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed conversation record: ") + e.what());
    }
}

} // namespace promodel::orchestrator
