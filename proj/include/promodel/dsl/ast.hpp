#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace promodel::dsl {

struct Expr;

struct Identifier {
    std::string name;
};

struct StringLiteral {
    std::string value;
};

struct NoneLiteral {};

struct ListLiteral {
    std::vector<Expr> items;
};

struct TupleLiteral {
    std::vector<Expr> items;
};

struct Argument {
    std::optional<std::string> keyword;
    std::shared_ptr<const Expr> value;
};

// `receiver.method(args)`, or `method(args)` when there is no receiver.
struct Call {
    std::shared_ptr<const Expr> receiver;
    std::string method;
    std::vector<Argument> args;
};

struct CopyCall {
    std::shared_ptr<const Expr> receiver;
};

struct Expr {
    std::variant<Identifier, StringLiteral, NoneLiteral, ListLiteral, TupleLiteral, Call, CopyCall> node;
    std::size_t line = 0;
    std::size_t column = 0;

    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(node);
    }
    template <typename T>
    const T& as() const {
        return std::get<T>(node);
    }
};

// `from module import name [as alias]` or `import module [as alias]`
// (then `name` is empty).
struct ImportStmt {
    std::string module;
    std::string name;
    std::string alias;
};

struct Assignment {
    std::string target;
    Expr value;
};

struct Statement {
    std::variant<ImportStmt, Assignment> node;
    std::size_t line = 0;

    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(node);
    }
    template <typename T>
    const T& as() const {
        return std::get<T>(node);
    }
};

struct Program {
    std::vector<Statement> statements;
};

// Structural equality; source positions are ignored.
inline bool equal(const Expr& a, const Expr& b);

inline bool equal(const std::shared_ptr<const Expr>& a, const std::shared_ptr<const Expr>& b) {
    if (!a || !b) {
        return !a && !b;
    }
    return equal(*a, *b);
}

inline bool equal(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!equal(a[i], b[i])) {
            return false;
        }
    }
    return true;
}

inline bool equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, Identifier>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, StringLiteral>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, NoneLiteral>) {
                return true;
            } else if constexpr (std::is_same_v<T, ListLiteral> || std::is_same_v<T, TupleLiteral>) {
                return equal(x.items, y.items);
            } else if constexpr (std::is_same_v<T, Call>) {
                if (x.method != y.method || !equal(x.receiver, y.receiver) || x.args.size() != y.args.size()) {
                    return false;
                }
                for (std::size_t i = 0; i < x.args.size(); ++i) {
                    if (x.args[i].keyword != y.args[i].keyword || !equal(x.args[i].value, y.args[i].value)) {
                        return false;
                    }
                }
                return true;
            } else {
                return equal(x.receiver, y.receiver);
            }
        },
        a.node);
}

inline bool equal(const Statement& a, const Statement& b) {
    if (a.node.index() != b.node.index()) {
        return false;
    }
    if (a.is<ImportStmt>()) {
        const auto& x = a.as<ImportStmt>();
        const auto& y = b.as<ImportStmt>();
        return x.module == y.module && x.name == y.name && x.alias == y.alias;
    }
    return a.as<Assignment>().target == b.as<Assignment>().target &&
           equal(a.as<Assignment>().value, b.as<Assignment>().value);
}

inline bool equal(const Program& a, const Program& b) {
    if (a.statements.size() != b.statements.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.statements.size(); ++i) {
        if (!equal(a.statements[i], b.statements[i])) {
            return false;
        }
    }
    return true;
}

inline std::string quote(const std::string& text) {
    std::string out = "'";
    for (char c : text) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\'': out += "\\'"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out += c;
        }
    }
    return out + "'";
}

inline std::string render(const Expr& expr) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Identifier>) {
                return x.name;
            } else if constexpr (std::is_same_v<T, StringLiteral>) {
                return quote(x.value);
            } else if constexpr (std::is_same_v<T, NoneLiteral>) {
                return "None";
            } else if constexpr (std::is_same_v<T, ListLiteral>) {
                std::string out = "[";
                for (std::size_t i = 0; i < x.items.size(); ++i) {
                    out += (i ? ", " : "") + render(x.items[i]);
                }
                return out + "]";
            } else if constexpr (std::is_same_v<T, TupleLiteral>) {
                std::string out = "(";
                for (std::size_t i = 0; i < x.items.size(); ++i) {
                    out += (i ? ", " : "") + render(x.items[i]);
                }
                return out + (x.items.size() == 1 ? ",)" : ")");
            } else if constexpr (std::is_same_v<T, Call>) {
                std::string out = x.receiver ? render(*x.receiver) + "." + x.method : x.method;
                out += "(";
                for (std::size_t i = 0; i < x.args.size(); ++i) {
                    out += i ? ", " : "";
                    if (x.args[i].keyword) {
                        out += *x.args[i].keyword + "=";
                    }
                    out += render(*x.args[i].value);
                }
                return out + ")";
            } else {
                return render(*x.receiver) + ".copy()";
            }
        },
        expr.node);
}

inline std::string render(const Statement& statement) {
    if (statement.is<ImportStmt>()) {
        const auto& s = statement.as<ImportStmt>();
        std::string out = s.name.empty() ? "import " + s.module : "from " + s.module + " import " + s.name;
        return s.alias.empty() ? out : out + " as " + s.alias;
    }
    return statement.as<Assignment>().target + " = " + render(statement.as<Assignment>().value);
}

// Canonical source text, one statement per line.
inline std::string render(const Program& program) {
    std::string out;
    for (const auto& statement : program.statements) {
        out += render(statement) + "\n";
    }
    return out;
}

} // namespace promodel::dsl
