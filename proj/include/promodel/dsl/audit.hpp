#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promodel/dsl/ast.hpp"
#include "promodel/dsl/parser.hpp"

namespace promodel::dsl {

enum class SecurityIssue {
    ForbiddenImport,
    UnknownFunction,
    ForbiddenSyntax,
    MissingFinalModel,
    BadArity,
    BadArgumentType,
    UndefinedVariable
};

constexpr std::string_view to_string(SecurityIssue issue) {
    switch (issue) {
    case SecurityIssue::ForbiddenImport: return "ForbiddenImport";
    case SecurityIssue::UnknownFunction: return "UnknownFunction";
    case SecurityIssue::ForbiddenSyntax: return "ForbiddenSyntax";
    case SecurityIssue::MissingFinalModel: return "MissingFinalModel";
    case SecurityIssue::BadArity: return "BadArity";
    case SecurityIssue::BadArgumentType: return "BadArgumentType";
    case SecurityIssue::UndefinedVariable: return "UndefinedVariable";
    }
    return "Unknown";
}

struct SecurityViolation {
    SecurityIssue kind;
    std::size_t line = 0;
    std::string message;
};

inline constexpr std::string_view generator_module = "utils.model_generation";
inline constexpr std::string_view generator_class = "ModelGenerator";
inline constexpr std::string_view result_variable = "final_model";

// API contracts, phrased for error prompts.
inline std::string api_contract(std::string_view function) {
    if (function == "activity") {
        return "activity(label) takes 1 string argument, the activity label";
    }
    if (function == "xor") {
        return "xor(*args) takes n >= 2 arguments, the submodels; at most one of them may be None to make the "
               "choice skippable";
    }
    if (function == "loop") {
        return "loop(do, redo) takes 2 arguments, the do and redo parts; either may be None, but not both";
    }
    if (function == "partial_order") {
        return "partial_order(dependencies) takes 1 argument, a list of tuples of submodels; (a, b) orders a "
               "before b and (a,) adds a without constraints";
    }
    if (function == "copy") {
        return "model.copy() takes no arguments and returns a fresh copy of the model";
    }
    return {};
}

namespace detail {

enum class ValueType { GeneratorClass, Generator, Model, String, None, List, Tuple, Unknown };

inline std::string describe(ValueType type) {
    switch (type) {
    case ValueType::GeneratorClass: return "the ModelGenerator class";
    case ValueType::Generator: return "a ModelGenerator";
    case ValueType::Model: return "a process model";
    case ValueType::String: return "a string";
    case ValueType::None: return "None";
    case ValueType::List: return "a list";
    case ValueType::Tuple: return "a tuple";
    case ValueType::Unknown: return "an unknown value";
    }
    return "a value";
}

class Auditor {
public:
    std::vector<SecurityViolation> run(const Program& program) {
        env_[std::string(generator_class)] = ValueType::GeneratorClass;
        std::size_t last_line = 1;
        for (const auto& statement : program.statements) {
            last_line = statement.line;
            if (statement.is<ImportStmt>()) {
                import(statement.as<ImportStmt>(), statement.line);
            } else {
                const auto& assignment = statement.as<Assignment>();
                env_[assignment.target] = infer(assignment.value);
            }
        }
        const auto final_it = env_.find(std::string(result_variable));
        if (final_it == env_.end()) {
            report(SecurityIssue::MissingFinalModel, last_line,
                   "the program never assigns the variable final_model");
        } else if (final_it->second != ValueType::Model && final_it->second != ValueType::Unknown) {
            std::size_t line = last_line;
            for (const auto& statement : program.statements) {
                if (statement.is<Assignment>() && statement.as<Assignment>().target == result_variable) {
                    line = statement.line;
                }
            }
            report(SecurityIssue::BadArgumentType, line,
                   "final_model must be a process model, but it is " + describe(final_it->second));
        }
        std::stable_sort(violations_.begin(), violations_.end(),
                         [](const SecurityViolation& a, const SecurityViolation& b) { return a.line < b.line; });
        return std::move(violations_);
    }

private:
    void report(SecurityIssue kind, std::size_t line, std::string message) {
        violations_.push_back({kind, line, std::move(message)});
    }

    void import(const ImportStmt& s, std::size_t line) {
        if (s.module == generator_module && s.name == generator_class) {
            env_[s.alias.empty() ? s.name : s.alias] = ValueType::GeneratorClass;
            return;
        }
        const std::string what = s.name.empty() ? s.module : s.module + "." + s.name;
        report(SecurityIssue::ForbiddenImport, line,
               "importing '" + what + "' is not allowed; only ModelGenerator from utils.model_generation may be "
               "imported");
        const auto bound = !s.alias.empty() ? s.alias : !s.name.empty() ? s.name : s.module.substr(0, s.module.find('.'));
        env_[bound] = ValueType::Unknown;
    }

    ValueType infer(const Expr& expr) {
        if (expr.is<Identifier>()) {
            const auto& name = expr.as<Identifier>().name;
            const auto it = env_.find(name);
            if (it == env_.end()) {
                report(SecurityIssue::UndefinedVariable, expr.line, "variable '" + name + "' is used before it is defined");
                return ValueType::Unknown;
            }
            return it->second;
        }
        if (expr.is<StringLiteral>()) {
            return ValueType::String;
        }
        if (expr.is<NoneLiteral>()) {
            return ValueType::None;
        }
        if (expr.is<ListLiteral>()) {
            for (const auto& item : expr.as<ListLiteral>().items) {
                infer(item);
            }
            return ValueType::List;
        }
        if (expr.is<TupleLiteral>()) {
            for (const auto& item : expr.as<TupleLiteral>().items) {
                infer(item);
            }
            return ValueType::Tuple;
        }
        if (expr.is<CopyCall>()) {
            const auto receiver = infer(*expr.as<CopyCall>().receiver);
            if (receiver != ValueType::Model && receiver != ValueType::Unknown) {
                report(SecurityIssue::BadArgumentType, expr.line,
                       "copy() can only be called on a process model, not on " + describe(receiver));
                return ValueType::Unknown;
            }
            return ValueType::Model;
        }
        return call(expr);
    }

    ValueType call(const Expr& expr) {
        const auto& c = expr.as<Call>();
        if (!c.receiver) {
            const auto it = env_.find(c.method);
            if (it != env_.end() && it->second == ValueType::GeneratorClass) {
                if (!c.args.empty()) {
                    report(SecurityIssue::BadArity, expr.line, c.method + "() takes no arguments");
                }
                return ValueType::Generator;
            }
            report(SecurityIssue::UnknownFunction, expr.line,
                   "function '" + c.method + "' is not available; use the ModelGenerator functions activity, xor, "
                   "loop and partial_order");
            for (const auto& arg : c.args) {
                infer(*arg.value);
            }
            return ValueType::Unknown;
        }
        const auto receiver = infer(*c.receiver);
        if (receiver != ValueType::Generator) {
            if (receiver != ValueType::Unknown) {
                report(SecurityIssue::UnknownFunction, expr.line,
                       "'" + c.method + "' cannot be called on " + describe(receiver) +
                           "; only ModelGenerator functions and model.copy() are available");
            }
            for (const auto& arg : c.args) {
                infer(*arg.value);
            }
            return ValueType::Unknown;
        }
        if (c.method == "activity") {
            return activity(expr, c);
        }
        if (c.method == "xor") {
            return xor_call(expr, c);
        }
        if (c.method == "loop") {
            return loop(expr, c);
        }
        if (c.method == "partial_order") {
            return partial_order(expr, c);
        }
        report(SecurityIssue::UnknownFunction, expr.line,
               "ModelGenerator has no function '" + c.method + "'; available: activity, xor, loop, partial_order");
        for (const auto& arg : c.args) {
            infer(*arg.value);
        }
        return ValueType::Unknown;
    }

    // Maps positional and keyword arguments onto `params`. Returns nullopt
    // after reporting if the shape does not fit.
    std::optional<std::vector<const Expr*>> bind(const Expr& expr, const Call& c,
                                                 const std::vector<std::string_view>& params) {
        std::vector<const Expr*> bound(params.size(), nullptr);
        bool ok = true;
        std::size_t positional = 0;
        for (const auto& arg : c.args) {
            if (!arg.keyword) {
                if (positional >= params.size()) {
                    report(SecurityIssue::BadArity, expr.line,
                           "too many arguments to " + c.method + ": " + api_contract(c.method));
                    return std::nullopt;
                }
                bound[positional++] = arg.value.get();
                continue;
            }
            const auto it = std::find(params.begin(), params.end(), *arg.keyword);
            if (it == params.end()) {
                report(SecurityIssue::BadArgumentType, expr.line,
                       "unknown keyword argument '" + *arg.keyword + "' for " + c.method + ": " +
                           api_contract(c.method));
                ok = false;
                continue;
            }
            auto& slot = bound[it - params.begin()];
            if (slot) {
                report(SecurityIssue::BadArgumentType, expr.line,
                       "argument '" + *arg.keyword + "' given more than once to " + c.method);
                ok = false;
                continue;
            }
            slot = arg.value.get();
        }
        if (!ok) {
            return std::nullopt;
        }
        if (std::find(bound.begin(), bound.end(), nullptr) != bound.end()) {
            report(SecurityIssue::BadArity, expr.line, "missing argument to " + c.method + ": " + api_contract(c.method));
            return std::nullopt;
        }
        return bound;
    }

    bool model_or_none(const Expr& arg, const std::string& where) {
        const auto type = infer(arg);
        if (type == ValueType::Model || type == ValueType::None || type == ValueType::Unknown) {
            return true;
        }
        report(SecurityIssue::BadArgumentType, arg.line,
               where + " must be a process model or None, not " + describe(type));
        return false;
    }

    ValueType activity(const Expr& expr, const Call& c) {
        const auto bound = bind(expr, c, {"label"});
        if (!bound) {
            return ValueType::Unknown;
        }
        const auto type = infer(*(*bound)[0]);
        if (type != ValueType::String && type != ValueType::Unknown) {
            report(SecurityIssue::BadArgumentType, expr.line,
                   "activity label must be a string, not " + describe(type) + ": " + api_contract("activity"));
        }
        return ValueType::Model;
    }

    ValueType xor_call(const Expr& expr, const Call& c) {
        for (const auto& arg : c.args) {
            if (arg.keyword) {
                report(SecurityIssue::BadArgumentType, expr.line,
                       "xor does not take keyword arguments: " + api_contract("xor"));
                return ValueType::Unknown;
            }
        }
        if (c.args.size() < 2) {
            report(SecurityIssue::BadArity, expr.line,
                   "xor called with " + std::to_string(c.args.size()) + " argument(s): " + api_contract("xor"));
        }
        for (const auto& arg : c.args) {
            model_or_none(*arg.value, "every xor argument");
        }
        return ValueType::Model;
    }

    ValueType loop(const Expr& expr, const Call& c) {
        const auto bound = bind(expr, c, {"do", "redo"});
        if (!bound) {
            return ValueType::Unknown;
        }
        model_or_none(*(*bound)[0], "the do part of loop");
        model_or_none(*(*bound)[1], "the redo part of loop");
        return ValueType::Model;
    }

    ValueType partial_order(const Expr& expr, const Call& c) {
        const auto bound = bind(expr, c, {"dependencies"});
        if (!bound) {
            return ValueType::Unknown;
        }
        const Expr& deps = *(*bound)[0];
        if (!deps.is<ListLiteral>()) {
            const auto type = infer(deps);
            if (type != ValueType::List && type != ValueType::Unknown) {
                report(SecurityIssue::BadArgumentType, deps.line,
                       "dependencies must be a list, not " + describe(type) + ": " + api_contract("partial_order"));
            }
            return ValueType::Model;
        }
        for (const auto& item : deps.as<ListLiteral>().items) {
            dependency(item);
        }
        return ValueType::Model;
    }

    void dependency(const Expr& item) {
        if (!item.is<TupleLiteral>()) {
            const auto type = infer(item);
            if (type != ValueType::Tuple && type != ValueType::Unknown) {
                report(SecurityIssue::BadArgumentType, item.line,
                       "each dependency must be a tuple (a, b) or (a,), not " + describe(type));
            }
            return;
        }
        const auto& items = item.as<TupleLiteral>().items;
        if (items.size() > 2) {
            report(SecurityIssue::BadArgumentType, item.line,
                   "a dependency tuple has 1 or 2 elements, found " + std::to_string(items.size()) +
                       "; express chains as separate pairs");
        }
        for (const auto& element : items) {
            const auto type = infer(element);
            if (type != ValueType::Model && type != ValueType::Unknown) {
                report(SecurityIssue::BadArgumentType, element.line,
                       "dependency elements must be process models, not " + describe(type));
            }
        }
    }

    std::map<std::string, ValueType> env_;
    std::vector<SecurityViolation> violations_;
};

} // namespace detail

// Empty iff the program only imports the generator, only calls the model
// builders and copy() with well-typed arguments, uses variables after
// defining them and assigns final_model.
inline std::vector<SecurityViolation> audit(const Program& program) { return detail::Auditor().run(program); }

struct Analysis {
    std::optional<Program> program; // set when parsing succeeded
    std::vector<SecurityViolation> violations;

    bool ok() const { return program && violations.empty(); }
};

// parse + audit, with syntax errors turned into a ForbiddenSyntax violation.
inline Analysis analyze(std::string_view source) {
    Analysis analysis;
    try {
        analysis.program = parse(source);
    } catch (const SyntaxError& e) {
        analysis.violations.push_back({SecurityIssue::ForbiddenSyntax, e.line(), e.what()});
        return analysis;
    }
    analysis.violations = audit(*analysis.program);
    return analysis;
}

} // namespace promodel::dsl
