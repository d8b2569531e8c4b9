#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "promodel/error.hpp"
#include "promodel/powl/model.hpp"

namespace promodel::powl {

// ordered_json keeps insertion order, which fixes the field order of the
// serialized document.
using Json = nlohmann::ordered_json;

inline Json to_json_value(const PowlModel& model) {
    Json out;
    out["type"] = std::string(to_string(model.kind()));
    switch (model.kind()) {
    case Kind::Activity:
        out["label"] = model.label();
        break;
    case Kind::Silent:
        break;
    case Kind::Xor: {
        auto& children = out["children"] = Json::array();
        for (const auto& child : model.as<Xor>().children) {
            children.push_back(to_json_value(child));
        }
        break;
    }
    case Kind::Loop:
        out["do"] = to_json_value(model.as<Loop>().body);
        out["redo"] = to_json_value(model.as<Loop>().redo);
        break;
    case Kind::PartialOrder: {
        const auto& order = model.as<PartialOrder>();
        auto& nodes = out["nodes"] = Json::array();
        for (const auto& node : order.nodes) {
            nodes.push_back(to_json_value(node));
        }
        auto& edges = out["edges"] = Json::array();
        for (const auto& [from, to] : order.edges) {
            edges.push_back(Json::array({from, to}));
        }
        break;
    }
    }
    return out;
}

inline std::string to_json(const PowlModel& model) { return to_json_value(model).dump(); }

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaError, "POWL JSON schema error at " + where + ": " + what);
}

template <class J>
const J& field(const J& object, const char* name, const std::string& where) {
    auto it = object.find(name);
    if (it == object.end()) {
        schema_error(where, std::string("missing field \"") + name + "\"");
    }
    return *it;
}

template <class J>
PowlModel from_json_value(const J& value, const std::string& where) {
    if (!value.is_object()) {
        schema_error(where, "expected an object");
    }
    const auto& type = field(value, "type", where);
    if (!type.is_string()) {
        schema_error(where + ".type", "expected a string");
    }
    const auto kind = type.template get<std::string>();
    if (kind == "activity") {
        const auto& label = field(value, "label", where);
        if (!label.is_string()) {
            schema_error(where + ".label", "expected a string");
        }
        return assemble(Activity{label.template get<std::string>()});
    }
    if (kind == "silent") {
        return assemble(Silent{});
    }
    if (kind == "xor") {
        const auto& children = field(value, "children", where);
        if (!children.is_array()) {
            schema_error(where + ".children", "expected an array");
        }
        Xor out;
        for (std::size_t i = 0; i < children.size(); ++i) {
            out.children.push_back(from_json_value(children[i], where + ".children[" + std::to_string(i) + "]"));
        }
        return assemble(std::move(out));
    }
    if (kind == "loop") {
        auto body = from_json_value(field(value, "do", where), where + ".do");
        auto redo = from_json_value(field(value, "redo", where), where + ".redo");
        return assemble(Loop{std::move(body), std::move(redo)});
    }
    if (kind == "partial_order") {
        const auto& nodes = field(value, "nodes", where);
        if (!nodes.is_array()) {
            schema_error(where + ".nodes", "expected an array");
        }
        PartialOrder out;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            out.nodes.push_back(from_json_value(nodes[i], where + ".nodes[" + std::to_string(i) + "]"));
        }
        const auto& edges = field(value, "edges", where);
        if (!edges.is_array()) {
            schema_error(where + ".edges", "expected an array");
        }
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto here = where + ".edges[" + std::to_string(i) + "]";
            const auto& edge = edges[i];
            if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_unsigned() ||
                !edge[1].is_number_unsigned()) {
                schema_error(here, "expected a pair of node indices");
            }
            const auto from = edge[0].template get<std::size_t>();
            const auto to = edge[1].template get<std::size_t>();
            if (from >= out.nodes.size() || to >= out.nodes.size()) {
                schema_error(here, "node index out of range");
            }
            out.edges.emplace(from, to);
        }
        return assemble(std::move(out));
    }
    schema_error(where + ".type", "unknown type \"" + kind + "\"");
}

} // namespace detail

// Structural checks only (types, fields, index ranges). Semantic invariants
// such as acyclicity are left to validate() so that broken models can still
// be loaded and diagnosed.
template <class J>
PowlModel from_json_value(const J& value) {
    return detail::from_json_value(value, "$");
}

inline PowlModel from_json(std::string_view text) {
    Json value;
    try {
        value = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // byte offset -> line number for the error message
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) {
            line += text[i] == '\n' ? 1 : 0;
        }
        throw Error(ErrorCode::SchemaError,
                    "malformed POWL JSON at line " + std::to_string(line) + ": " + e.what());
    }
    return from_json_value(value);
}

} // namespace promodel::powl
