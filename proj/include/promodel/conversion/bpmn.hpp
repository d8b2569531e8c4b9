#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "promodel/error.hpp"
#include "promodel/powl/model.hpp"
#include "promodel/powl/order.hpp"
#include "promodel/powl/validate.hpp"

namespace promodel::conversion {

enum class BpmnKind { Task, StartEvent, EndEvent, XorGateway, AndGateway };

constexpr std::string_view to_string(BpmnKind kind) {
    switch (kind) {
    case BpmnKind::Task: return "task";
    case BpmnKind::StartEvent: return "startEvent";
    case BpmnKind::EndEvent: return "endEvent";
    case BpmnKind::XorGateway: return "exclusiveGateway";
    case BpmnKind::AndGateway: return "parallelGateway";
    }
    return "unknown";
}

struct BpmnNode {
    std::string id;
    BpmnKind kind;
    std::string label; // tasks only
};

struct BpmnFlow {
    std::string id;
    std::string source;
    std::string target;
};

struct BpmnModel {
    std::string name = "process";
    std::vector<BpmnNode> nodes;
    std::vector<BpmnFlow> flows;

    std::size_t count(BpmnKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [&](const BpmnNode& n) { return n.kind == kind; }));
    }

    const BpmnNode* find(std::string_view id) const {
        for (const auto& n : nodes) {
            if (n.id == id) {
                return &n;
            }
        }
        return nullptr;
    }
};

namespace detail {

class BpmnBuilder {
public:
    struct Fragment {
        std::size_t entry;
        std::size_t exit;
    };

    BpmnModel finish(const powl::PowlModel& root, std::string name) {
        const auto start = add("start", BpmnKind::StartEvent);
        const auto end = add("end", BpmnKind::EndEvent);
        const auto body = build(root, "r");
        flow(start, body.entry);
        flow(body.exit, end);
        simplify();
        return emit(std::move(name));
    }

private:
    enum class Role { Regular, Placeholder };

    struct Entry {
        BpmnNode node;
        Role role;
        bool alive = true;
    };

    std::size_t add(std::string id, BpmnKind kind, std::string label = {}, Role role = Role::Regular) {
        nodes_.push_back({{std::move(id), kind, std::move(label)}, role});
        return nodes_.size() - 1;
    }

    void flow(std::size_t from, std::size_t to) {
        if (from != to) {
            flows_.emplace(from, to);
        }
    }

    Fragment build(const powl::PowlModel& model, const std::string& path) {
        using namespace powl;
        switch (model.kind()) {
        case Kind::Activity: {
            const auto task = add("task_" + path, BpmnKind::Task, model.label());
            return {task, task};
        }
        case Kind::Silent: {
            // kind is irrelevant: placeholders are always removed
            const auto p = add("silent_" + path, BpmnKind::Task, {}, Role::Placeholder);
            return {p, p};
        }
        case Kind::Xor: {
            const auto split = add("xor_split_" + path, BpmnKind::XorGateway);
            const auto join = add("xor_join_" + path, BpmnKind::XorGateway);
            const auto& children = model.as<Xor>().children;
            for (std::size_t i = 0; i < children.size(); ++i) {
                const auto child = build(children[i], path + "_" + std::to_string(i));
                flow(split, child.entry);
                flow(child.exit, join);
            }
            return {split, join};
        }
        case Kind::Loop: {
            const auto join = add("loop_join_" + path, BpmnKind::XorGateway);
            const auto split = add("loop_split_" + path, BpmnKind::XorGateway);
            const auto body = build(model.as<Loop>().body, path + "_0");
            const auto redo = build(model.as<Loop>().redo, path + "_1");
            flow(join, body.entry);
            flow(body.exit, split);
            flow(split, redo.entry);
            flow(redo.exit, join);
            return {join, split};
        }
        case Kind::PartialOrder:
            return build_order(model.as<PartialOrder>(), path);
        }
        throw Error(ErrorCode::InvariantViolated, "unknown POWL node kind");
    }

    Fragment build_order(const powl::PartialOrder& order, const std::string& path) {
        const auto n = order.nodes.size();
        const auto reduction = powl::transitive_reduction(order.edges, n);
        std::vector<std::size_t> in_degree(n), out_degree(n);
        for (const auto& [from, to] : reduction) {
            ++out_degree[from];
            ++in_degree[to];
        }
        std::vector<std::size_t> entry(n), exit(n), sources, sinks;
        for (std::size_t k = 0; k < n; ++k) {
            const auto sub = path + "_" + std::to_string(k);
            const auto fragment = build(order.nodes[k], sub);
            entry[k] = fragment.entry;
            exit[k] = fragment.exit;
            if (in_degree[k] >= 2) {
                const auto join = add("and_in_" + sub, BpmnKind::AndGateway);
                flow(join, entry[k]);
                entry[k] = join;
            }
            if (out_degree[k] >= 2) {
                const auto split = add("and_out_" + sub, BpmnKind::AndGateway);
                flow(exit[k], split);
                exit[k] = split;
            }
            if (in_degree[k] == 0) {
                sources.push_back(k);
            }
            if (out_degree[k] == 0) {
                sinks.push_back(k);
            }
        }
        for (const auto& [from, to] : reduction) {
            flow(exit[from], entry[to]);
        }
        Fragment result{entry[sources.front()], exit[sinks.front()]};
        if (sources.size() > 1) {
            result.entry = add("and_split_" + path, BpmnKind::AndGateway);
            for (auto k : sources) {
                flow(result.entry, entry[k]);
            }
        }
        if (sinks.size() > 1) {
            result.exit = add("and_join_" + path, BpmnKind::AndGateway);
            for (auto k : sinks) {
                flow(exit[k], result.exit);
            }
        }
        return result;
    }

    bool removable(std::size_t node, std::size_t in, std::size_t out) const {
        const auto& e = nodes_[node];
        if (!e.alive || in != 1 || out != 1) {
            return false;
        }
        return e.role == Role::Placeholder || e.node.kind == BpmnKind::XorGateway ||
               e.node.kind == BpmnKind::AndGateway;
    }

    // Drops silent placeholders and pass-through gateways (one in, one out),
    // reconnecting their neighbours, until nothing changes.
    void simplify() {
        for (bool changed = true; changed;) {
            changed = false;
            std::vector<std::size_t> in(nodes_.size()), out(nodes_.size());
            for (const auto& [from, to] : flows_) {
                ++out[from];
                ++in[to];
            }
            for (std::size_t node = 0; node < nodes_.size(); ++node) {
                if (!removable(node, in[node], out[node])) {
                    continue;
                }
                std::size_t pred = 0, succ = 0;
                for (const auto& [from, to] : flows_) {
                    if (to == node) {
                        pred = from;
                    }
                    if (from == node) {
                        succ = to;
                    }
                }
                flows_.erase({pred, node});
                flows_.erase({node, succ});
                flow(pred, succ);
                nodes_[node].alive = false;
                changed = true;
                break;
            }
        }
    }

    BpmnModel emit(std::string name) const {
        BpmnModel model;
        model.name = std::move(name);
        for (const auto& e : nodes_) {
            if (e.alive) {
                model.nodes.push_back(e.node);
            }
        }
        std::size_t counter = 0;
        for (const auto& [from, to] : flows_) {
            model.flows.push_back(
                {"flow_" + std::to_string(++counter), nodes_[from].node.id, nodes_[to].node.id});
        }
        return model;
    }

    std::vector<Entry> nodes_;
    std::set<std::pair<std::size_t, std::size_t>> flows_;
};

} // namespace detail

// Block-structured BPMN derived from the POWL tree. Node ids encode the
// path of the originating POWL node, so they are stable across runs.
inline BpmnModel to_bpmn(const powl::PowlModel& model, std::string name = "process") {
    const auto violations = powl::validate(model);
    if (!violations.empty()) {
        throw Error(ErrorCode::ValidationFailed, "cannot convert an invalid model: " + violations.front().message);
    }
    return detail::BpmnBuilder().finish(model, std::move(name));
}

// Referential integrity and gateway shape. Empty result means well-formed.
inline std::vector<std::string> bpmn_problems(const BpmnModel& model) {
    std::vector<std::string> problems;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        if (!index.emplace(model.nodes[i].id, i).second) {
            problems.push_back("duplicate node id " + model.nodes[i].id);
        }
    }
    const auto n = model.nodes.size();
    std::vector<std::vector<std::size_t>> succ(n), pred(n);
    std::set<std::string> flow_ids;
    for (const auto& f : model.flows) {
        if (!flow_ids.insert(f.id).second) {
            problems.push_back("duplicate flow id " + f.id);
        }
        auto s = index.find(f.source);
        auto t = index.find(f.target);
        if (s == index.end() || t == index.end()) {
            problems.push_back("flow " + f.id + " references an unknown node");
            continue;
        }
        succ[s->second].push_back(t->second);
        pred[t->second].push_back(s->second);
    }
    std::vector<std::size_t> starts, ends;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = model.nodes[i];
        if (node.kind == BpmnKind::StartEvent) {
            starts.push_back(i);
        }
        if (node.kind == BpmnKind::EndEvent) {
            ends.push_back(i);
        }
        if ((node.kind == BpmnKind::XorGateway || node.kind == BpmnKind::AndGateway) && succ[i].size() < 2 &&
            pred[i].size() < 2) {
            problems.push_back("gateway " + node.id + " neither splits nor joins");
        }
        if (node.kind == BpmnKind::Task && (succ[i].size() != 1 || pred[i].size() != 1)) {
            problems.push_back("task " + node.id + " must have exactly one incoming and one outgoing flow");
        }
    }
    if (starts.size() != 1 || ends.size() != 1) {
        problems.push_back("expected exactly one start and one end event");
        return problems;
    }
    if (!pred[starts[0]].empty() || !succ[ends[0]].empty()) {
        problems.push_back("start event has incoming or end event has outgoing flows");
    }
    auto sweep = [&](std::size_t from, const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<char> seen(n, 0);
        std::deque<std::size_t> queue{from};
        seen[from] = 1;
        while (!queue.empty()) {
            const auto v = queue.front();
            queue.pop_front();
            for (auto w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    queue.push_back(w);
                }
            }
        }
        return seen;
    };
    const auto forward = sweep(starts[0], succ);
    const auto backward = sweep(ends[0], pred);
    for (std::size_t i = 0; i < n; ++i) {
        if (!forward[i] || !backward[i]) {
            problems.push_back("node " + model.nodes[i].id + " is not on a path from start to end");
        }
    }
    return problems;
}

} // namespace promodel::conversion
