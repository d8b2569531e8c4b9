#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "promodel/conversion/soundness.hpp"
#include "promodel/conversion/to_petri_net.hpp"
#include "promodel/dsl/audit.hpp"
#include "promodel/dsl/extract.hpp"
#include "promodel/dsl/interpret.hpp"
#include "promodel/error.hpp"
#include "promodel/orchestrator/conversation.hpp"
#include "promodel/orchestrator/provider.hpp"
#include "promodel/powl/validate.hpp"
#include "promodel/prompting/prompts.hpp"
#include "promodel/prompting/template.hpp"
#include "promodel/semantics/language.hpp"

namespace promodel::orchestrator {

struct LoopConfig {
    std::size_t max_adjustable_attempts = 2;
    std::size_t max_critical_attempts = 5;
    ProviderSettings settings;
    std::size_t soundness_state_cap = 1000000;
    // bounds of the before/after language check on automatic repairs
    std::size_t compare_max_loop = 1;
    std::size_t compare_max_len = 8;
};

// Critical problems abort the turn once the repair budget is spent;
// adjustable ones get resolved mechanically instead.
inline Category classify(std::string_view kind) {
    static const std::set<std::string_view> adjustable = {"SharedSubmodel", "UntrimmedLabel", "DuplicateEdge",
                                                          "LanguageChanged", "ComparisonSkipped"};
    return adjustable.count(kind) ? Category::Adjustable : Category::Critical;
}

inline Category classify(dsl::SecurityIssue issue) { return classify(dsl::to_string(issue)); }
inline Category classify(powl::ViolationKind kind) { return classify(powl::to_string(kind)); }
inline Category classify(ErrorCode code) { return classify(to_string(code)); }

inline std::string new_conversation_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    auto bits = rng();
    for (int i = 0; i < 16; ++i, bits >>= 4) {
        id += hex[bits & 15];
    }
    return id;
}

namespace detail {

// Outcome of running one LLM answer through the pipeline.
struct Attempt {
    std::optional<powl::PowlModel> model; // set once interpretation succeeded
    std::string code;
    std::vector<Diagnostic> problems;

    bool has(Category c) const {
        for (const auto& d : problems) {
            if (d.category == c && !d.warning) {
                return true;
            }
        }
        return false;
    }
};

inline Diagnostic make(Stage stage, std::string kind, std::string message, std::size_t attempt,
                       std::optional<std::size_t> line = std::nullopt) {
    Diagnostic d;
    d.category = classify(kind);
    d.stage = stage;
    d.kind = std::move(kind);
    d.message = std::move(message);
    d.attempt = attempt;
    d.line = line;
    return d;
}

inline void check_conversion(Attempt& a, const powl::PowlModel& model, const LoopConfig& config, std::size_t call) {
    try {
        const auto report = conversion::check_soundness(conversion::to_petri_net(model),
                                                        conversion::SoundnessOptions{config.soundness_state_cap, true});
        if (!report.sound) {
            std::string text = "the converted Petri net is not sound";
            for (const auto& v : report.violations) {
                text += "; " + std::string(conversion::to_string(v.kind)) + ": " + v.detail;
            }
            a.problems.push_back(make(Stage::Convert, "Unsound", text, call));
        }
    } catch (const Error& e) {
        a.problems.push_back(make(Stage::Convert, "ConversionFailed", e.what(), call));
    }
}

inline Attempt evaluate(const std::string& response, const LoopConfig& config, std::size_t call) {
    Attempt a;
    try {
        a.code = dsl::extract_code(response).code;
    } catch (const Error& e) {
        a.problems.push_back(make(Stage::Extraction, "NoCodeFound", e.what(), call));
        return a;
    }
    const auto analysis = dsl::analyze(a.code);
    for (const auto& v : analysis.violations) {
        const auto stage = v.kind == dsl::SecurityIssue::ForbiddenSyntax ? Stage::Parse : Stage::Audit;
        a.problems.push_back(make(stage, std::string(dsl::to_string(v.kind)), v.message, call, v.line));
    }
    if (!analysis.ok()) {
        return a;
    }
    try {
        a.model = dsl::interpret(*analysis.program);
    } catch (const dsl::InterpretationFailure& e) {
        a.problems.push_back(make(Stage::Interpret, "InterpretationError",
                                  std::string(to_string(e.cause())) + ": " + e.detail(), call, e.line()));
        return a;
    } catch (const Error& e) {
        a.problems.push_back(make(Stage::Interpret, "InterpretationError", e.what(), call));
        return a;
    }
    for (const auto& v : powl::validate(*a.model)) {
        a.problems.push_back(
            make(Stage::Validate, std::string(powl::to_string(v.kind)),
                 v.message + " (at " + powl::format_location(v.location) + ")", call));
    }
    for (const auto& location : powl::untrimmed_labels(*a.model)) {
        a.problems.push_back(make(Stage::Validate, "UntrimmedLabel",
                                  "activity label " + dsl::quote(powl::resolve(*a.model, location)->label()) +
                                      " has leading or trailing whitespace",
                                  call));
    }
    if (a.problems.empty()) {
        check_conversion(a, *a.model, config, call);
    }
    return a;
}

inline prompting::ErrorContext error_context(const Attempt& a) {
    prompting::ErrorContext context;
    std::vector<const Diagnostic*> blocking;
    for (const auto& d : a.problems) {
        if (!d.warning) {
            blocking.push_back(&d);
        }
    }
    // Critical problems are reported first: they have to go regardless.
    std::stable_partition(blocking.begin(), blocking.end(),
                          [](const Diagnostic* d) { return d->category == Category::Critical; });
    context.kind = blocking.front()->kind;
    context.line = blocking.front()->line;
    context.code = a.code;
    for (std::size_t i = 0; i < blocking.size() && i < 5; ++i) {
        const auto& d = *blocking[i];
        if (!context.message.empty()) {
            context.message += "\n";
        }
        if (d.line && i > 0) {
            context.message += "line " + std::to_string(*d.line) + ": ";
        }
        context.message += (i > 0 ? d.kind + ": " : "") + d.message;
    }
    return context;
}

// Copies shared submodels and trims labels, then compares bounded languages
// before and after, since the copy must not change the intended behavior.
inline powl::PowlModel auto_resolve(const powl::PowlModel& model, const LoopConfig& config, std::size_t call,
                                    std::vector<Diagnostic>& log) {
    const auto repaired = powl::trim_labels(powl::repair_shared_submodels(model));
    std::set<std::string> kinds;
    for (const auto& v : powl::validate(model)) {
        if (v.kind == powl::ViolationKind::SharedSubmodel) {
            kinds.insert("SharedSubmodel");
        }
    }
    if (!powl::untrimmed_labels(model).empty()) {
        kinds.insert("UntrimmedLabel");
    }
    for (const auto& kind : kinds) {
        auto d = make(Stage::Validate, kind, kind + " resolved automatically after the LLM repair budget was spent",
                      call);
        d.auto_resolved = true;
        log.push_back(std::move(d));
    }
    try {
        semantics::LanguageOptions shared;
        shared.allow_shared = true;
        const auto before = semantics::bounded_language(powl::trim_labels(model), config.compare_max_loop,
                                                        config.compare_max_len, shared);
        const auto after = semantics::bounded_language(repaired, config.compare_max_loop, config.compare_max_len);
        if (before != after) {
            auto d = make(Stage::Validate, "LanguageChanged",
                          "the automatic repair changed the bounded trace language (" +
                              std::to_string(before.size()) + " traces before, " + std::to_string(after.size()) +
                              " after)",
                          call);
            d.warning = true;
            log.push_back(std::move(d));
        }
    } catch (const Error& e) {
        auto d = make(Stage::Validate, "ComparisonSkipped",
                      std::string("language comparison for the automatic repair skipped: ") + e.what(), call);
        d.warning = true;
        log.push_back(std::move(d));
    }
    return repaired;
}

// Runs the repair loop on a history that already ends with the user's
// request. Appends to conversation.history only.
inline void run_turn(Conversation& conversation, Turn& turn, LlmProvider& provider, const LoopConfig& config,
                     const CancelToken* cancel) {
    for (;;) {
        const std::size_t call = turn.provider_calls + 1;
        if (cancel && cancel->cancelled()) {
            turn.diagnostics.push_back(make(Stage::Provider, "Cancelled", "the turn was cancelled", call));
            turn.status = Status::Failed;
            return;
        }
        std::string response;
        try {
            ++turn.provider_calls;
            response = provider.send(conversation.history, config.settings);
        } catch (const Error& e) {
            turn.diagnostics.push_back(make(Stage::Provider, std::string(to_string(e.code())), e.what(), call));
            turn.status = Status::Failed;
            return;
        } catch (const std::exception& e) {
            turn.diagnostics.push_back(make(Stage::Provider, "ProviderFailure", e.what(), call));
            turn.status = Status::Failed;
            return;
        }
        conversation.history.push_back({prompting::Author::Assistant, response});
        auto attempt = evaluate(response, config, call);
        turn.diagnostics.insert(turn.diagnostics.end(), attempt.problems.begin(), attempt.problems.end());

        std::optional<powl::PowlModel> accepted;
        if (attempt.problems.empty()) {
            accepted = attempt.model;
        } else if (attempt.has(Category::Critical)) {
            if (turn.critical_rounds >= config.max_critical_attempts) {
                turn.status = Status::Failed;
                return;
            }
            ++turn.critical_rounds;
        } else if (turn.adjustable_rounds >= config.max_adjustable_attempts) {
            auto repaired = auto_resolve(*attempt.model, config, call, turn.diagnostics);
            Attempt check;
            check.code = attempt.code;
            for (const auto& v : powl::validate(repaired)) {
                check.problems.push_back(make(Stage::Validate, std::string(powl::to_string(v.kind)), v.message, call));
            }
            if (check.problems.empty()) {
                check_conversion(check, repaired, config, call);
            }
            turn.diagnostics.insert(turn.diagnostics.end(), check.problems.begin(), check.problems.end());
            if (!check.problems.empty()) {
                turn.status = Status::Failed;
                return;
            }
            accepted = repaired;
        } else {
            ++turn.adjustable_rounds;
        }

        if (accepted) {
            Version version{*accepted, attempt.code, {}, Clock::now()};
            for (const auto& d : turn.diagnostics) {
                version.diagnostics.push_back(d);
            }
            conversation.versions.push_back(std::move(version));
            turn.version = conversation.versions.size() - 1;
            turn.status = Status::Succeeded;
            return;
        }
        conversation.history.push_back(prompting::build_error_prompt(error_context(attempt)));
    }
}

} // namespace detail

// Initial generation. Never throws for bad LLM output or provider failures;
// those end up as a Failed conversation with diagnostics.
inline Conversation generate(const std::string& description, LlmProvider& provider, const LoopConfig& config,
                             const prompting::PromptTemplate& templ, const CancelToken* cancel = nullptr,
                             std::string id = {}) {
    Conversation conversation;
    conversation.id = id.empty() ? new_conversation_id() : std::move(id);
    conversation.description = description;
    conversation.history = prompting::build_generation_prompt(description, templ, provider.supports_system_role());
    Turn turn;
    turn.kind = TurnKind::Generate;
    turn.input = description;
    detail::run_turn(conversation, turn, provider, config, cancel);
    conversation.status = turn.status;
    conversation.turns.push_back(std::move(turn));
    return conversation;
}

// Feedback turn on a conversation that has a model. A failed turn keeps the
// previous version current and the conversation usable.
inline Turn& refine(Conversation& conversation, const std::string& feedback, LlmProvider& provider,
                    const LoopConfig& config, const CancelToken* cancel = nullptr) {
    if (conversation.status != Status::Succeeded || conversation.versions.empty()) {
        throw Error(ErrorCode::PreconditionFailed, "feedback needs a conversation with a generated model");
    }
    conversation.history.push_back(prompting::build_feedback_prompt(feedback));
    Turn turn;
    turn.kind = TurnKind::Feedback;
    turn.input = feedback;
    detail::run_turn(conversation, turn, provider, config, cancel);
    conversation.turns.push_back(std::move(turn));
    return conversation.turns.back();
}

} // namespace promodel::orchestrator
