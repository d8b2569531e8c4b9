#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "promodel/error.hpp"
#include "promodel/powl/order.hpp"

namespace promodel::powl {

using NodeId = std::uint64_t;

struct Node;

enum class Kind { Activity, Silent, Xor, Loop, PartialOrder };

constexpr std::string_view to_string(Kind kind) {
    switch (kind) {
    case Kind::Activity: return "activity";
    case Kind::Silent: return "silent";
    case Kind::Xor: return "xor";
    case Kind::Loop: return "loop";
    case Kind::PartialOrder: return "partial_order";
    }
    return "unknown";
}

// Handle to an immutable POWL node. Copying the handle shares the node (same
// NodeId); deep_copy() produces fresh identities. Sharing one node under two
// parents is representable on purpose so that validate() can report it.
class PowlModel {
public:
    PowlModel() = delete;
    explicit PowlModel(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    NodeId id() const;
    Kind kind() const;
    const Node& node() const { return *node_; }

    template <class T>
    bool is() const;
    template <class T>
    const T& as() const;

    // Activity label; empty for every other kind.
    const std::string& label() const;

    // Direct submodels in location order: xor children, loop {do, redo},
    // partial-order nodes.
    std::vector<PowlModel> children() const;

    bool same_instance(const PowlModel& other) const { return node_ == other.node_; }

private:
    std::shared_ptr<const Node> node_;
};

struct Activity {
    std::string label;
};

struct Silent {};

struct Xor {
    std::vector<PowlModel> children;
};

struct Loop {
    PowlModel body; // "do" part
    PowlModel redo;
};

struct PartialOrder {
    std::vector<PowlModel> nodes;
    EdgeSet edges;
};

using NodeVariant = std::variant<Activity, Silent, Xor, Loop, PartialOrder>;

struct Node {
    NodeId id;
    NodeVariant content;
};

namespace detail {

inline NodeId next_node_id() {
    static std::atomic<NodeId> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

} // namespace detail

inline NodeId PowlModel::id() const { return node_->id; }

inline Kind PowlModel::kind() const { return static_cast<Kind>(node_->content.index()); }

template <class T>
bool PowlModel::is() const {
    return std::holds_alternative<T>(node_->content);
}

template <class T>
const T& PowlModel::as() const {
    return std::get<T>(node_->content);
}

inline const std::string& PowlModel::label() const {
    static const std::string empty;
    if (const auto* activity = std::get_if<Activity>(&node_->content)) {
        return activity->label;
    }
    return empty;
}

inline std::vector<PowlModel> PowlModel::children() const {
    return std::visit(
        [](const auto& content) -> std::vector<PowlModel> {
            using T = std::decay_t<decltype(content)>;
            if constexpr (std::is_same_v<T, Xor>) {
                return content.children;
            } else if constexpr (std::is_same_v<T, Loop>) {
                return {content.body, content.redo};
            } else if constexpr (std::is_same_v<T, PartialOrder>) {
                return content.nodes;
            } else {
                return {};
            }
        },
        node_->content);
}

// Builds a node without checking any invariant. Used by deserialization and
// structural rewrites; everything user-facing goes through the make_* API.
inline PowlModel assemble(NodeVariant content, std::optional<NodeId> id = std::nullopt) {
    return PowlModel(std::make_shared<const Node>(Node{id ? *id : detail::next_node_id(), std::move(content)}));
}

inline std::string_view trim(std::string_view text) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = text.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(ws);
    return text.substr(first, last - first + 1);
}

// std::nullopt plays the role of the generator API's None argument.
using Operand = std::optional<PowlModel>;

inline PowlModel make_silent() { return assemble(Silent{}); }

inline PowlModel make_activity(std::string label) {
    if (trim(label).empty()) {
        throw Error(ErrorCode::EmptyLabel, "activity label must not be empty");
    }
    return assemble(Activity{std::move(label)});
}

inline PowlModel make_xor(const std::vector<Operand>& children) {
    if (children.size() < 2) {
        throw Error(ErrorCode::XorArityTooSmall,
                    "xor takes at least 2 submodels, got " + std::to_string(children.size()));
    }
    const auto nones = std::count_if(children.begin(), children.end(), [](const Operand& c) { return !c; });
    if (nones > 1) {
        throw Error(ErrorCode::TooManyNoneMarkers, "xor accepts at most one None argument");
    }
    Xor xor_node;
    for (const auto& child : children) {
        xor_node.children.push_back(child ? *child : make_silent());
    }
    return assemble(std::move(xor_node));
}

inline PowlModel make_loop(const Operand& body, const Operand& redo) {
    if (!body && !redo) {
        throw Error(ErrorCode::DegenerateLoop, "loop needs a do or a redo part; both are None");
    }
    return assemble(Loop{body ? *body : make_silent(), redo ? *redo : make_silent()});
}

// A dependency is either an ordered pair (from, to) or a singleton (from,)
// which only contributes an unordered node.
struct Dependency {
    PowlModel from;
    std::optional<PowlModel> to;
};

inline PowlModel make_partial_order(const std::vector<Dependency>& dependencies) {
    if (dependencies.empty()) {
        throw Error(ErrorCode::EmptyDependencies, "partial_order needs at least one dependency");
    }
    PartialOrder order;
    std::unordered_map<NodeId, std::size_t> index;
    auto intern = [&](const PowlModel& model) {
        auto [it, inserted] = index.try_emplace(model.id(), order.nodes.size());
        if (inserted) {
            order.nodes.push_back(model);
        }
        return it->second;
    };
    for (const auto& dep : dependencies) {
        const auto from = intern(dep.from);
        if (dep.to) {
            order.edges.emplace(from, intern(*dep.to));
        }
    }
    return assemble(std::move(order));
}

// Copy with fresh identities. Sharing inside the input is mirrored in the
// output (a node reached twice is copied once).
inline PowlModel deep_copy(const PowlModel& model) {
    std::unordered_map<NodeId, PowlModel> memo;
    std::function<PowlModel(const PowlModel&)> copy = [&](const PowlModel& m) -> PowlModel {
        if (auto it = memo.find(m.id()); it != memo.end()) {
            return it->second;
        }
        PowlModel result = std::visit(
            [&](const auto& content) -> PowlModel {
                using T = std::decay_t<decltype(content)>;
                if constexpr (std::is_same_v<T, Xor>) {
                    Xor out;
                    for (const auto& child : content.children) {
                        out.children.push_back(copy(child));
                    }
                    return assemble(std::move(out));
                } else if constexpr (std::is_same_v<T, Loop>) {
                    return assemble(Loop{copy(content.body), copy(content.redo)});
                } else if constexpr (std::is_same_v<T, PartialOrder>) {
                    PartialOrder out{{}, content.edges};
                    for (const auto& child : content.nodes) {
                        out.nodes.push_back(copy(child));
                    }
                    return assemble(std::move(out));
                } else {
                    return assemble(content);
                }
            },
            m.node().content);
        memo.emplace(m.id(), result);
        return result;
    };
    return copy(model);
}

// Equality of shape and labels, ignoring node identity.
inline bool structurally_equal(const PowlModel& a, const PowlModel& b) {
    if (a.kind() != b.kind()) {
        return false;
    }
    switch (a.kind()) {
    case Kind::Activity:
        return a.label() == b.label();
    case Kind::Silent:
        return true;
    case Kind::PartialOrder:
        if (a.as<PartialOrder>().edges != b.as<PartialOrder>().edges) {
            return false;
        }
        [[fallthrough]];
    case Kind::Xor:
    case Kind::Loop: {
        const auto left = a.children();
        const auto right = b.children();
        if (left.size() != right.size()) {
            return false;
        }
        for (std::size_t i = 0; i < left.size(); ++i) {
            if (!structurally_equal(left[i], right[i])) {
                return false;
            }
        }
        return true;
    }
    }
    return false;
}

// Pre-order visit of every occurrence (shared nodes are visited once per parent).
template <class Visitor>
void for_each_occurrence(const PowlModel& model, Visitor&& visit) {
    std::vector<std::size_t> path;
    std::function<void(const PowlModel&)> walk = [&](const PowlModel& m) {
        visit(m, std::as_const(path));
        const auto kids = m.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            path.push_back(i);
            walk(kids[i]);
            path.pop_back();
        }
    };
    walk(model);
}

inline std::size_t count_activities(const PowlModel& model) {
    std::size_t count = 0;
    for_each_occurrence(model, [&](const PowlModel& m, const auto&) { count += m.is<Activity>() ? 1 : 0; });
    return count;
}

inline std::size_t count_nodes(const PowlModel& model) {
    std::size_t count = 0;
    for_each_occurrence(model, [&](const PowlModel&, const auto&) { ++count; });
    return count;
}

inline std::vector<std::string> activity_labels(const PowlModel& model) {
    std::vector<std::string> labels;
    for_each_occurrence(model, [&](const PowlModel& m, const auto&) {
        if (m.is<Activity>()) {
            labels.push_back(m.label());
        }
    });
    return labels;
}

inline bool contains_loop(const PowlModel& model) {
    bool found = false;
    for_each_occurrence(model, [&](const PowlModel& m, const auto&) { found = found || m.is<Loop>(); });
    return found;
}

// Short human-readable name of a node, used in violation messages.
inline std::string describe(const PowlModel& model) {
    switch (model.kind()) {
    case Kind::Activity: return "'" + model.label() + "'";
    case Kind::Silent: return "silent step";
    default: {
        std::string text(to_string(model.kind()));
        text += "(";
        const auto kids = model.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            text += (i ? ", " : "") + describe(kids[i]);
            if (text.size() > 120) {
                text += ", ...";
                break;
            }
        }
        return text + ")";
    }
    }
}

} // namespace promodel::powl
