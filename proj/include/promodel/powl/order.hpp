#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "promodel/error.hpp"

namespace promodel::powl {

using Edge = std::pair<std::size_t, std::size_t>;
using EdgeSet = std::set<Edge>;

namespace detail {

inline std::vector<std::vector<std::size_t>> successors(const EdgeSet& edges, std::size_t n) {
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& [from, to] : edges) {
        if (from >= n || to >= n) {
            throw Error(ErrorCode::InvariantViolated, "edge endpoint out of range");
        }
        out[from].push_back(to);
    }
    return out;
}

} // namespace detail

// Reachability by one DFS per source node: O(n * (n + |edges|)).
inline EdgeSet transitive_closure(const EdgeSet& edges, std::size_t n) {
    const auto succ = detail::successors(edges, n);
    EdgeSet closure;
    std::vector<char> seen(n);
    std::vector<std::size_t> stack;
    for (std::size_t source = 0; source < n; ++source) {
        std::fill(seen.begin(), seen.end(), 0);
        stack.assign(succ[source].begin(), succ[source].end());
        while (!stack.empty()) {
            const auto node = stack.back();
            stack.pop_back();
            if (seen[node]) {
                continue;
            }
            seen[node] = 1;
            closure.emplace(source, node);
            for (auto next : succ[node]) {
                if (!seen[next]) {
                    stack.push_back(next);
                }
            }
        }
    }
    return closure;
}

inline bool is_acyclic(const EdgeSet& edges, std::size_t n) {
    for (const auto& [from, to] : transitive_closure(edges, n)) {
        if (from == to) {
            return false;
        }
    }
    return true;
}

// Nodes lying on a cycle, i.e. i with (i, i) in the closure.
inline std::vector<std::size_t> cyclic_nodes(const EdgeSet& edges, std::size_t n) {
    std::vector<std::size_t> nodes;
    for (const auto& [from, to] : transitive_closure(edges, n)) {
        if (from == to) {
            nodes.push_back(from);
        }
    }
    return nodes;
}

// An edge (i, j) of the closure survives iff no k satisfies i < k < j in the order.
inline EdgeSet transitive_reduction(const EdgeSet& edges, std::size_t n) {
    const EdgeSet closure = transitive_closure(edges, n);
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (const auto& [from, to] : closure) {
        if (from == to) {
            throw Error(ErrorCode::CycleInPartialOrder, "cannot reduce a cyclic relation");
        }
        reach[from][to] = 1;
    }
    EdgeSet reduction;
    for (const auto& [from, to] : closure) {
        bool implied = false;
        for (std::size_t mid = 0; mid < n && !implied; ++mid) {
            implied = reach[from][mid] && reach[mid][to];
        }
        if (!implied) {
            reduction.emplace(from, to);
        }
    }
    return reduction;
}

} // namespace promodel::powl
