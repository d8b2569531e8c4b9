#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "promodel/dsl/ast.hpp"
#include "promodel/error.hpp"

namespace promodel::dsl {

// Parse failure at a source position. Code is ForbiddenSyntax.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& message)
        : Error(ErrorCode::ForbiddenSyntax,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line), column_(column), detail_(message) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

enum class TokenKind { Name, String, Number, Op, Newline, End };

struct Token {
    TokenKind kind;
    std::string text; // decoded value for strings
    std::size_t line;
    std::size_t column;
};

namespace detail {

inline bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Python-like tokenizer for the subset. Newlines inside brackets are joined,
// comments and blank lines vanish, leading indentation is an error.
class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        bool line_start = true;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (line_start) {
                // measure indentation of a logical line that has content
                std::size_t probe = pos_;
                while (probe < src_.size() && (src_[probe] == ' ' || src_[probe] == '\t')) {
                    ++probe;
                }
                const bool blank = probe >= src_.size() || src_[probe] == '\n' || src_[probe] == '\r' ||
                                   src_[probe] == '#';
                if (!blank && probe != pos_) {
                    throw SyntaxError(line_, column_ + (probe - pos_), "unexpected indentation");
                }
                line_start = false;
            }
            if (c == '\n') {
                if (depth_ == 0 && !tokens.empty() && tokens.back().kind != TokenKind::Newline) {
                    tokens.push_back({TokenKind::Newline, "", line_, column_});
                }
                advance();
                line_start = depth_ == 0;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
                advance();
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
                continue;
            }
            if (c == '\\') {
                const auto line = line_, column = column_;
                advance();
                if (pos_ < src_.size() && src_[pos_] == '\r') {
                    advance();
                }
                if (pos_ >= src_.size() || src_[pos_] != '\n') {
                    throw SyntaxError(line, column, "unexpected character '\\'");
                }
                advance();
                continue;
            }
            if (is_name_start(c)) {
                const auto line = line_, column = column_;
                std::string name;
                while (pos_ < src_.size() && is_name_char(src_[pos_])) {
                    name += src_[pos_];
                    advance();
                }
                if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"')) {
                    throw SyntaxError(line, column, "prefixed string literals (" + name + "'...') are not allowed");
                }
                tokens.push_back({TokenKind::Name, std::move(name), line, column});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                const auto line = line_, column = column_;
                std::string number;
                while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == '.')) {
                    number += src_[pos_];
                    advance();
                }
                tokens.push_back({TokenKind::Number, std::move(number), line, column});
                continue;
            }
            if (c == '\'' || c == '"') {
                tokens.push_back(string_literal());
                continue;
            }
            if (static_cast<unsigned char>(c) >= 0x80) {
                throw SyntaxError(line_, column_, "non-ASCII character outside a string literal");
            }
            const auto line = line_, column = column_;
            std::string op(1, c);
            advance();
            // two-character operators, reported as a unit
            static constexpr std::array<std::string_view, 14> pairs{"==", "!=", "<=", ">=", "**", "//", "->", ":=",
                                                                    "+=", "-=", "*=", "/=", "<<", ">>"};
            if (pos_ < src_.size()) {
                const std::string two = op + src_[pos_];
                if (std::find(pairs.begin(), pairs.end(), two) != pairs.end()) {
                    op = two;
                    advance();
                }
            }
            if (op == "(" || op == "[" || op == "{") {
                ++depth_;
            } else if ((op == ")" || op == "]" || op == "}") && depth_ > 0) {
                --depth_;
            }
            tokens.push_back({TokenKind::Op, std::move(op), line, column});
        }
        if (!tokens.empty() && tokens.back().kind != TokenKind::Newline) {
            tokens.push_back({TokenKind::Newline, "", line_, column_});
        }
        tokens.push_back({TokenKind::End, "", line_, column_});
        return tokens;
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    Token string_literal() {
        const auto line = line_, column = column_;
        const char quote_char = src_[pos_];
        if (src_.substr(pos_, 3) == std::string(3, quote_char)) {
            throw SyntaxError(line, column, "triple-quoted strings are not allowed");
        }
        advance();
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n') {
                throw SyntaxError(line, column, "unterminated string literal");
            }
            const char c = src_[pos_];
            if (c == quote_char) {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) {
                    throw SyntaxError(line, column, "unterminated string literal");
                }
                const char e = src_[pos_];
                switch (e) {
                case 'n': value += '\n'; break;
                case 't': value += '\t'; break;
                case 'r': value += '\r'; break;
                case '\\': value += '\\'; break;
                case '\'': value += '\''; break;
                case '"': value += '"'; break;
                default:
                    throw SyntaxError(line_, column_ - 1, std::string("unsupported escape sequence '\\") + e + "'");
                }
                advance();
                continue;
            }
            value += c;
            advance();
        }
        return {TokenKind::String, std::move(value), line, column};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
    int depth_ = 0;
};

inline bool is_keyword(const std::string& name) {
    static constexpr std::array<std::string_view, 35> keywords{
        "False", "True",   "and",    "as",     "assert", "async", "await",  "break",    "class",
        "continue", "def", "del",    "elif",   "else",   "except", "finally", "for",    "from",
        "global", "if",    "import", "in",     "is",     "lambda", "nonlocal", "not",   "or",
        "pass",  "raise",  "return", "try",    "while",  "with",  "yield",  "None"};
    return std::find(keywords.begin(), keywords.end(), name) != keywords.end();
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Program run() {
        Program program;
        while (peek().kind != TokenKind::End) {
            program.statements.push_back(statement());
            expect_newline();
        }
        return program;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(index_ + ahead, tokens_.size() - 1)];
    }
    const Token& next() {
        const auto& t = tokens_[index_];
        if (index_ + 1 < tokens_.size()) {
            ++index_;
        }
        return t;
    }
    bool at_op(std::string_view op, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Op && peek(ahead).text == op;
    }
    bool at_name(std::string_view name) const { return peek().kind == TokenKind::Name && peek().text == name; }

    [[noreturn]] void unexpected(const Token& t, const std::string& context) const {
        switch (t.kind) {
        case TokenKind::Number:
            throw SyntaxError(t.line, t.column, "numeric literals are not allowed");
        case TokenKind::Newline:
            throw SyntaxError(t.line, t.column, "unexpected end of line " + context);
        case TokenKind::End:
            throw SyntaxError(t.line, t.column, "unexpected end of input " + context);
        case TokenKind::String:
            throw SyntaxError(t.line, t.column, "unexpected string literal " + context);
        case TokenKind::Name:
            if (is_keyword(t.text)) {
                throw SyntaxError(t.line, t.column, "keyword '" + t.text + "' is not allowed here");
            }
            throw SyntaxError(t.line, t.column, "unexpected name '" + t.text + "' " + context);
        case TokenKind::Op:
            break;
        }
        static constexpr std::array<std::string_view, 17> arithmetic{"+", "-", "*", "/", "%", "**", "//", "<<", ">>",
                                                                     "&", "|", "^", "~", "+=", "-=", "*=", "/="};
        if (std::find(arithmetic.begin(), arithmetic.end(), t.text) != arithmetic.end()) {
            throw SyntaxError(t.line, t.column, "operator '" + t.text + "' is not allowed");
        }
        throw SyntaxError(t.line, t.column, "unexpected '" + t.text + "' " + context);
    }

    void expect_op(std::string_view op, const std::string& context) {
        if (!at_op(op)) {
            unexpected(peek(), context);
        }
        next();
    }

    std::string expect_identifier(const std::string& context) {
        const auto& t = peek();
        if (t.kind != TokenKind::Name || is_keyword(t.text)) {
            unexpected(t, context);
        }
        return next().text;
    }

    void expect_newline() {
        if (peek().kind == TokenKind::Newline) {
            next();
            return;
        }
        if (at_op(";")) {
            throw SyntaxError(peek().line, peek().column, "several statements on one line are not allowed");
        }
        unexpected(peek(), "after the end of a statement");
    }

    std::string dotted_name() {
        std::string name = expect_identifier("in an import");
        while (at_op(".")) {
            next();
            name += "." + expect_identifier("in an import");
        }
        return name;
    }

    Statement statement() {
        const auto& first = peek();
        Statement s;
        s.line = first.line;
        if (at_name("from")) {
            next();
            ImportStmt import;
            import.module = dotted_name();
            if (!at_name("import")) {
                unexpected(peek(), "in an import");
            }
            next();
            if (at_op("*")) {
                throw SyntaxError(peek().line, peek().column, "wildcard imports are not allowed");
            }
            import.name = expect_identifier("in an import");
            if (at_name("as")) {
                next();
                import.alias = expect_identifier("in an import");
            }
            if (at_op(",")) {
                throw SyntaxError(peek().line, peek().column, "import exactly one name per statement");
            }
            s.node = std::move(import);
            return s;
        }
        if (at_name("import")) {
            next();
            ImportStmt import;
            import.module = dotted_name();
            if (at_name("as")) {
                next();
                import.alias = expect_identifier("in an import");
            }
            if (at_op(",")) {
                throw SyntaxError(peek().line, peek().column, "import exactly one module per statement");
            }
            s.node = std::move(import);
            return s;
        }
        if (first.kind == TokenKind::Name && !is_keyword(first.text) && at_op("=", 1)) {
            Assignment assignment;
            assignment.target = next().text;
            next(); // '='
            assignment.value = expression();
            if (at_op("=")) {
                throw SyntaxError(peek().line, peek().column, "chained assignment is not allowed");
            }
            s.node = std::move(assignment);
            return s;
        }
        if (first.kind == TokenKind::Name && !is_keyword(first.text)) {
            // give a precise reason for common statement shapes
            if (at_op(",", 1)) {
                throw SyntaxError(first.line, first.column, "tuple assignment is not allowed");
            }
            if (peek(1).kind == TokenKind::Op && peek(1).text.size() == 2 && peek(1).text[1] == '=' &&
                peek(1).text != "==") {
                throw SyntaxError(peek(1).line, peek(1).column, "augmented assignment is not allowed");
            }
            throw SyntaxError(first.line, first.column,
                              "only imports and assignments of the form name = expression are allowed");
        }
        unexpected(first, "at the start of a statement");
    }

    Expr expression() {
        Expr expr = atom();
        while (at_op(".")) {
            next();
            const auto& name_token = peek();
            const auto method = expect_identifier("after '.'");
            if (!at_op("(")) {
                throw SyntaxError(name_token.line, name_token.column,
                                  "attribute access ('." + method + "') is only allowed as a method call");
            }
            auto receiver = std::make_shared<const Expr>(std::move(expr));
            expr = Expr{};
            expr.line = receiver->line;
            expr.column = receiver->column;
            if (method == "copy") {
                next(); // '('
                if (!at_op(")")) {
                    throw SyntaxError(peek().line, peek().column, "copy() takes no arguments");
                }
                next();
                expr.node = CopyCall{std::move(receiver)};
            } else {
                expr.node = Call{std::move(receiver), method, arguments()};
            }
        }
        if (at_op("[")) {
            throw SyntaxError(peek().line, peek().column, "subscripts are not allowed");
        }
        if (at_op("(")) {
            throw SyntaxError(peek().line, peek().column, "calling the result of an expression is not allowed");
        }
        return expr;
    }

    std::vector<Argument> arguments() {
        expect_op("(", "in a call");
        std::vector<Argument> args;
        bool keyword_seen = false;
        while (!at_op(")")) {
            if (at_op("*") || at_op("**")) {
                throw SyntaxError(peek().line, peek().column, "argument unpacking is not allowed");
            }
            Argument arg;
            if (peek().kind == TokenKind::Name && !is_keyword(peek().text) && at_op("=", 1)) {
                arg.keyword = next().text;
                next();
                keyword_seen = true;
            } else if (keyword_seen) {
                throw SyntaxError(peek().line, peek().column, "positional argument follows keyword argument");
            }
            arg.value = std::make_shared<const Expr>(expression());
            args.push_back(std::move(arg));
            if (!at_op(",")) {
                break;
            }
            next();
        }
        expect_op(")", "in a call");
        return args;
    }

    Expr atom() {
        const auto& t = peek();
        Expr expr;
        expr.line = t.line;
        expr.column = t.column;
        if (t.kind == TokenKind::String) {
            expr.node = StringLiteral{next().text};
            if (peek().kind == TokenKind::String) {
                throw SyntaxError(peek().line, peek().column, "implicit string concatenation is not allowed");
            }
            return expr;
        }
        if (t.kind == TokenKind::Name) {
            if (t.text == "None") {
                next();
                expr.node = NoneLiteral{};
                return expr;
            }
            if (is_keyword(t.text)) {
                unexpected(t, "in an expression");
            }
            const auto name = next().text;
            if (at_op("(")) {
                expr.node = Call{nullptr, name, arguments()};
            } else {
                expr.node = Identifier{name};
            }
            return expr;
        }
        if (at_op("[")) {
            next();
            ListLiteral list;
            while (!at_op("]")) {
                list.items.push_back(expression());
                if (at_name("for")) {
                    throw SyntaxError(peek().line, peek().column, "comprehensions are not allowed");
                }
                if (!at_op(",")) {
                    break;
                }
                next();
            }
            expect_op("]", "in a list");
            expr.node = std::move(list);
            return expr;
        }
        if (at_op("(")) {
            next();
            if (at_op(")")) {
                throw SyntaxError(t.line, t.column, "empty tuples are not allowed");
            }
            std::vector<Expr> items;
            bool tuple = false;
            while (!at_op(")")) {
                items.push_back(expression());
                if (at_name("for")) {
                    throw SyntaxError(peek().line, peek().column, "generator expressions are not allowed");
                }
                if (!at_op(",")) {
                    break;
                }
                tuple = true;
                next();
            }
            expect_op(")", "in parentheses");
            if (!tuple) {
                return items.front();
            }
            expr.node = TupleLiteral{std::move(items)};
            return expr;
        }
        if (at_op("{")) {
            throw SyntaxError(t.line, t.column, "dictionaries and sets are not allowed");
        }
        if (at_op("@")) {
            throw SyntaxError(t.line, t.column, "decorators are not allowed");
        }
        unexpected(t, "in an expression");
    }

    std::vector<Token> tokens_;
    std::size_t index_ = 0;
};

} // namespace detail

inline std::vector<Token> tokenize(std::string_view source) { return detail::Lexer(source).run(); }

// Parses the restricted model-construction language. Anything outside the
// grammar raises SyntaxError with the offending position.
inline Program parse(std::string_view source) { return detail::Parser(tokenize(source)).run(); }

} // namespace promodel::dsl
