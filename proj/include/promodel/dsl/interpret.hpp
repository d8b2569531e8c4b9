#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "promodel/dsl/ast.hpp"
#include "promodel/dsl/audit.hpp"
#include "promodel/error.hpp"
#include "promodel/powl/model.hpp"

namespace promodel::dsl {

// A builder call failed while running an audited program. code() is
// InterpretationError; cause() is the constructor's own code.
class InterpretationFailure : public Error {
public:
    InterpretationFailure(std::size_t line, ErrorCode cause, const std::string& detail)
        : Error(ErrorCode::InterpretationError, "line " + std::to_string(line) + ": " + detail),
          line_(line), cause_(cause), detail_(detail) {}

    std::size_t line() const noexcept { return line_; }
    ErrorCode cause() const noexcept { return cause_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    ErrorCode cause_;
    std::string detail_;
};

namespace detail {

struct Value {
    enum class Type { Generator, GeneratorClass, Model, String, None, Sequence } type = Type::None;
    std::optional<powl::PowlModel> model;
    std::string text;
    std::vector<Value> items;
};

class Interpreter {
public:
    powl::PowlModel run(const Program& program) {
        env_[std::string(generator_class)] = Value{Value::Type::GeneratorClass, {}, {}, {}};
        for (const auto& statement : program.statements) {
            if (statement.is<ImportStmt>()) {
                const auto& s = statement.as<ImportStmt>();
                env_[s.alias.empty() ? s.name : s.alias] = Value{Value::Type::GeneratorClass, {}, {}, {}};
                continue;
            }
            const auto& assignment = statement.as<Assignment>();
            env_[assignment.target] = eval(assignment.value);
        }
        return *env_.at(std::string(result_variable)).model;
    }

private:
    Value eval(const Expr& expr) {
        if (expr.is<Identifier>()) {
            return env_.at(expr.as<Identifier>().name);
        }
        if (expr.is<StringLiteral>()) {
            return Value{Value::Type::String, {}, expr.as<StringLiteral>().value, {}};
        }
        if (expr.is<NoneLiteral>()) {
            return Value{};
        }
        if (expr.is<ListLiteral>() || expr.is<TupleLiteral>()) {
            Value seq{Value::Type::Sequence, {}, {}, {}};
            const auto& items = expr.is<ListLiteral>() ? expr.as<ListLiteral>().items : expr.as<TupleLiteral>().items;
            for (const auto& item : items) {
                seq.items.push_back(eval(item));
            }
            return seq;
        }
        if (expr.is<CopyCall>()) {
            return model(powl::deep_copy(*eval(*expr.as<CopyCall>().receiver).model));
        }
        const auto& c = expr.as<Call>();
        if (!c.receiver) {
            return Value{Value::Type::Generator, {}, {}, {}};
        }
        try {
            return model(build(c));
        } catch (const Error& e) {
            throw InterpretationFailure(expr.line, e.code(), e.what());
        }
    }

    static Value model(powl::PowlModel m) { return Value{Value::Type::Model, std::move(m), {}, {}}; }

    // Arguments in parameter order; the audit guarantees the binding exists.
    std::vector<Value> arguments(const Call& c, const std::vector<std::string_view>& params) {
        std::vector<Value> bound(params.size());
        std::size_t positional = 0;
        for (const auto& arg : c.args) {
            std::size_t slot = positional;
            if (arg.keyword) {
                for (slot = 0; params[slot] != *arg.keyword; ++slot) {
                }
            } else {
                ++positional;
            }
            bound[slot] = eval(*arg.value);
        }
        return bound;
    }

    static std::optional<powl::PowlModel> operand(const Value& v) { return v.model; }

    powl::PowlModel build(const Call& c) {
        if (c.method == "activity") {
            return powl::make_activity(arguments(c, {"label"})[0].text);
        }
        if (c.method == "xor") {
            std::vector<std::optional<powl::PowlModel>> children;
            for (const auto& arg : c.args) {
                children.push_back(operand(eval(*arg.value)));
            }
            return powl::make_xor(children);
        }
        if (c.method == "loop") {
            const auto args = arguments(c, {"do", "redo"});
            return powl::make_loop(operand(args[0]), operand(args[1]));
        }
        std::vector<powl::Dependency> dependencies;
        const auto args = arguments(c, {"dependencies"});
        for (const auto& tuple : args[0].items) {
            // Lists bound to variables are only checked here.
            const bool well_formed = tuple.type == Value::Type::Sequence && !tuple.items.empty() &&
                                     tuple.items.size() <= 2 && tuple.items[0].model &&
                                     (tuple.items.size() == 1 || tuple.items[1].model);
            if (!well_formed) {
                throw Error(ErrorCode::InterpretationError,
                            "each dependency must be a tuple (a, b) or (a,) of process models");
            }
            dependencies.push_back({*tuple.items[0].model,
                                    tuple.items.size() > 1 ? tuple.items[1].model : std::nullopt});
        }
        return powl::make_partial_order(dependencies);
    }

    std::map<std::string, Value> env_;
};

} // namespace detail

// Runs an audited program. Throws PreconditionFailed when the audit is not
// clean and InterpretationFailure when a builder rejects its arguments.
inline powl::PowlModel interpret(const Program& program) {
    if (const auto violations = audit(program); !violations.empty()) {
        throw Error(ErrorCode::PreconditionFailed,
                    "program did not pass the audit: " + violations.front().message);
    }
    return detail::Interpreter().run(program);
}

} // namespace promodel::dsl
