#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "promodel/error.hpp"
#include "promodel/powl/model.hpp"
#include "promodel/prompting/chat.hpp"
#include "promodel/prompting/template.hpp"

namespace promodel::prompting {

// Role text goes into a system message when the provider has that role,
// otherwise it is prepended to the first user message.
inline std::vector<ChatMessage> build_generation_prompt(const std::string& description, const PromptTemplate& t,
                                                        bool system_role = true) {
    if (powl::trim(description).empty()) {
        throw Error(ErrorCode::EmptyDescription, "the process description is empty");
    }
    std::string body = t.knowledge + "\n\n" + t.api + "\n\n";
    for (std::size_t i = 0; i < t.examples.size(); ++i) {
        const auto& e = t.examples[i];
        body += "Example " + std::to_string(i + 1) + ".\nProcess description:\n" + e.description +
                "\n\nCode:\n```python\n" + e.code + "```\n\nCommon errors to avoid for this example:\n" +
                e.common_errors + "\n\n";
    }
    body += t.negative + "\n\n" + t.task + "\n" + description;
    if (system_role) {
        return {{Author::System, t.role}, {Author::User, body}};
    }
    return {{Author::User, t.role + "\n\n" + body}};
}

// What went wrong with the previous answer. `kind` is a diagnostic name
// (SharedSubmodel, BadArity, ...); `code` is the program the line refers to.
struct ErrorContext {
    std::string kind;
    std::string message;
    std::optional<std::size_t> line;
    std::string code;
};

inline std::string error_hint(std::string_view kind) {
    if (kind == "SharedSubmodel") {
        return "Every submodel may occur only once in the model. Where you need the same activity or submodel "
               "again, create another instance with copy(), e.g. again = original.copy(), and use that.";
    }
    if (kind == "CycleInPartialOrder") {
        return "A partial order must be irreflexive and acyclic. Remove the dependencies that close the cycle "
               "among the nodes listed above; if a part really repeats, model it with loop.";
    }
    if (kind == "ForbiddenImport") {
        return "Do not import anything except ModelGenerator from utils.model_generation.";
    }
    if (kind == "UnknownFunction") {
        return "Only the generator functions activity, xor, loop and partial_order and the method copy() are "
               "available.";
    }
    if (kind == "ForbiddenSyntax") {
        return "Write only assignments of generator calls, string literals, None, variables, and lists of "
               "tuples. Loops, conditionals, definitions, arithmetic and other Python features are not supported.";
    }
    if (kind == "BadArity" || kind == "BadArgumentType") {
        return "Check the call against the function descriptions given earlier.";
    }
    if (kind == "UndefinedVariable") {
        return "Define every variable before you use it.";
    }
    if (kind == "MissingFinalModel") {
        return "Assign the complete model to the variable final_model.";
    }
    if (kind == "NoCodeFound") {
        return "Answer with one Python code block that assigns the model to final_model.";
    }
    if (kind == "EmptyLabel") {
        return "Every activity needs a non-empty label.";
    }
    if (kind == "Unsound" || kind == "ConversionFailed") {
        return "Rebuild the model from the generator functions only, keeping each submodel in a single place.";
    }
    return {};
}

namespace detail {

// Up to two lines around `line`, numbered, with the offending one marked.
inline std::string code_excerpt(const std::string& code, std::size_t line) {
    std::istringstream in(code);
    std::string text;
    std::string out;
    for (std::size_t n = 1; std::getline(in, text); ++n) {
        if (n + 2 >= line && n <= line + 2) {
            out += (n == line ? "> " : "  ") + std::to_string(n) + " | " + text + "\n";
        }
    }
    return out;
}

} // namespace detail

inline ChatMessage build_error_prompt(const ErrorContext& error) {
    if (powl::trim(error.message).empty()) {
        throw Error(ErrorCode::EmptyErrorText, "the error text is empty");
    }
    std::string text = "Your code could not be used to produce a valid model. The following error occurred";
    text += error.kind.empty() ? ":\n" : " (" + error.kind + "):\n";
    if (error.line && error.message.find("line " + std::to_string(*error.line)) == std::string::npos) {
        text += "line " + std::to_string(*error.line) + ": ";
    }
    text += error.message + "\n";
    if (error.line && !error.code.empty()) {
        if (const auto excerpt = detail::code_excerpt(error.code, *error.line); !excerpt.empty()) {
            text += "\n" + excerpt;
        }
    }
    if (const auto hint = error_hint(error.kind); !hint.empty()) {
        text += "\n" + hint + "\n";
    }
    text += "\nPlease fix the error and reply with the complete corrected Python code, again assigning the model "
            "to final_model.";
    return {Author::User, text};
}

inline ChatMessage build_error_prompt(const std::string& error_text) { return build_error_prompt(ErrorContext{{}, error_text, {}, {}}); }

inline ChatMessage build_feedback_prompt(const std::string& feedback) {
    if (powl::trim(feedback).empty()) {
        throw Error(ErrorCode::EmptyFeedback, "the feedback is empty");
    }
    return {Author::User, "Please update the model you generated last according to the following feedback:\n\n" +
                              feedback +
                              "\n\nReply with the complete updated Python code, assigning the whole model to "
                              "final_model."};
}

} // namespace promodel::prompting
