#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "promodel/dsl/audit.hpp"
#include "promodel/dsl/parser.hpp"
#include "promodel/error.hpp"

namespace promodel::dsl {

struct Extraction {
    std::string code;
    std::size_t blocks = 0;     // fenced blocks in the response
    std::size_t candidates = 0; // fenced blocks mentioning final_model
    bool fenced = true;
};

namespace detail {

inline std::string_view strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Line-based fence scan. An unterminated final fence still yields a block:
// truncated responses are common and the parser decides what is usable.
inline std::vector<std::string> fenced_blocks(std::string_view text) {
    std::vector<std::string> blocks;
    std::istringstream in{std::string(text)};
    std::string line;
    bool inside = false;
    std::string current;
    while (std::getline(in, line)) {
        const auto s = strip(line);
        if (s.starts_with("```")) {
            if (inside) {
                blocks.push_back(std::move(current));
                current.clear();
                inside = false;
            } else {
                inside = true;
            }
            continue;
        }
        if (inside) {
            current += line;
            current += '\n';
        }
    }
    if (inside) {
        blocks.push_back(std::move(current));
    }
    return blocks;
}

} // namespace detail

// The last fenced block that mentions final_model; failing that, the whole
// response if it mentions final_model and parses.
inline Extraction extract_code(std::string_view response) {
    Extraction result;
    const auto blocks = detail::fenced_blocks(response);
    result.blocks = blocks.size();
    for (const auto& block : blocks) {
        if (block.find(result_variable) != std::string::npos) {
            ++result.candidates;
            result.code = block;
        }
    }
    if (result.candidates > 0) {
        return result;
    }
    if (response.find(result_variable) != std::string_view::npos) {
        try {
            parse(response);
            result.code = std::string(response);
            result.fenced = false;
            return result;
        } catch (const SyntaxError&) {
        }
    }
    throw Error(ErrorCode::NoCodeFound, blocks.empty()
                                            ? "the response contains no code block"
                                            : "no code block in the response assigns final_model");
}

inline std::string extract_code_block(std::string_view response) { return extract_code(response).code; }

} // namespace promodel::dsl
