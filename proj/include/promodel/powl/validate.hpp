#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "promodel/powl/model.hpp"
#include "promodel/powl/order.hpp"

namespace promodel::powl {

enum class ViolationKind { CycleInPartialOrder, XorArityTooSmall, SharedSubmodel, EmptyLabel };

constexpr std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::CycleInPartialOrder: return "CycleInPartialOrder";
    case ViolationKind::XorArityTooSmall: return "XorArityTooSmall";
    case ViolationKind::SharedSubmodel: return "SharedSubmodel";
    case ViolationKind::EmptyLabel: return "EmptyLabel";
    }
    return "Unknown";
}

using Location = std::vector<std::size_t>;

struct Violation {
    ViolationKind kind;
    Location location; // child indices from the root
    std::string message;
};

inline std::string format_location(const Location& location) {
    std::string text = "root";
    for (auto index : location) {
        text += "/" + std::to_string(index);
    }
    return text;
}

// Node reached by following `location` from `model`.
inline std::optional<PowlModel> resolve(const PowlModel& model, const Location& location) {
    std::optional<PowlModel> current = model;
    for (auto index : location) {
        const auto kids = current->children();
        if (index >= kids.size()) {
            return std::nullopt;
        }
        current = kids[index];
    }
    return current;
}

// Reports every broken invariant; an empty result means the model is valid.
// Sorted by location, then kind. A shared node is reported at each repeated
// occurrence and its subtree is not descended into again.
inline std::vector<Violation> validate(const PowlModel& model) {
    std::vector<Violation> violations;
    std::unordered_set<NodeId> seen;
    Location path;
    std::function<void(const PowlModel&)> walk = [&](const PowlModel& m) {
        if (!seen.insert(m.id()).second) {
            violations.push_back({ViolationKind::SharedSubmodel, path,
                                  describe(m) + " is used more than once in the same model"});
            return;
        }
        switch (m.kind()) {
        case Kind::Activity:
            if (trim(m.label()).empty()) {
                violations.push_back({ViolationKind::EmptyLabel, path, "activity with an empty label"});
            }
            break;
        case Kind::Xor:
            if (m.as<Xor>().children.size() < 2) {
                violations.push_back({ViolationKind::XorArityTooSmall, path,
                                      "xor with " + std::to_string(m.as<Xor>().children.size()) +
                                          " submodel(s); at least 2 are required"});
            }
            break;
        case Kind::PartialOrder: {
            const auto& order = m.as<PartialOrder>();
            const auto cyclic = cyclic_nodes(order.edges, order.nodes.size());
            if (!cyclic.empty()) {
                std::string names;
                for (auto index : cyclic) {
                    names += (names.empty() ? "" : ", ") + describe(order.nodes[index]);
                }
                violations.push_back({ViolationKind::CycleInPartialOrder, path,
                                      "partial order is not irreflexive; these nodes lie on a cycle: " + names});
            }
            break;
        }
        default:
            break;
        }
        const auto kids = m.children();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            path.push_back(i);
            walk(kids[i]);
            path.pop_back();
        }
    };
    walk(model);
    std::stable_sort(violations.begin(), violations.end(), [](const Violation& a, const Violation& b) {
        if (a.location != b.location) {
            return a.location < b.location;
        }
        return a.kind < b.kind;
    });
    return violations;
}

inline bool has_violation(const std::vector<Violation>& violations, ViolationKind kind) {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

namespace detail {

// Rebuilds `m` with `kids` substituted, keeping its identity.
inline PowlModel with_children(const PowlModel& m, std::vector<PowlModel> kids) {
    switch (m.kind()) {
    case Kind::Xor:
        return assemble(Xor{std::move(kids)}, m.id());
    case Kind::Loop:
        return assemble(Loop{kids[0], kids[1]}, m.id());
    case Kind::PartialOrder:
        return assemble(PartialOrder{std::move(kids), m.as<PartialOrder>().edges}, m.id());
    default:
        return m;
    }
}

} // namespace detail

// Replaces the second and later occurrences of each shared node by a deep
// copy. Nodes that are not shared keep their identity.
inline PowlModel repair_shared_submodels(const PowlModel& model) {
    std::unordered_set<NodeId> seen;
    std::function<PowlModel(const PowlModel&)> repair = [&](const PowlModel& m) -> PowlModel {
        if (seen.count(m.id())) {
            // the copy may itself contain internal sharing
            return repair(deep_copy(m));
        }
        seen.insert(m.id());
        const auto kids = m.children();
        std::vector<PowlModel> fixed;
        bool changed = false;
        for (const auto& kid : kids) {
            fixed.push_back(repair(kid));
            changed = changed || !fixed.back().same_instance(kid);
        }
        return changed ? detail::with_children(m, std::move(fixed)) : m;
    };
    return repair(model);
}

// Activities whose label carries leading/trailing whitespace.
inline std::vector<Location> untrimmed_labels(const PowlModel& model) {
    std::vector<Location> found;
    for_each_occurrence(model, [&](const PowlModel& m, const Location& path) {
        if (m.is<Activity>() && trim(m.label()) != m.label() && !trim(m.label()).empty()) {
            found.push_back(path);
        }
    });
    return found;
}

// Rewrites labels to their trimmed form; identity of untouched nodes is kept.
inline PowlModel trim_labels(const PowlModel& model) {
    std::unordered_map<NodeId, PowlModel> memo;
    std::function<PowlModel(const PowlModel&)> fix = [&](const PowlModel& m) -> PowlModel {
        if (auto it = memo.find(m.id()); it != memo.end()) {
            return it->second;
        }
        PowlModel result = m;
        if (m.is<Activity>()) {
            const auto trimmed = trim(m.label());
            if (trimmed != m.label()) {
                result = assemble(Activity{std::string(trimmed)}, m.id());
            }
        } else {
            const auto kids = m.children();
            std::vector<PowlModel> fixed;
            bool changed = false;
            for (const auto& kid : kids) {
                fixed.push_back(fix(kid));
                changed = changed || !fixed.back().same_instance(kid);
            }
            if (changed) {
                result = detail::with_children(m, std::move(fixed));
            }
        }
        memo.emplace(m.id(), result);
        return result;
    };
    return fix(model);
}

} // namespace promodel::powl
