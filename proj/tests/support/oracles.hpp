#pragma once

// Brute-force reference implementations. Deliberately naive and independent
// of the code paths they check.

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "promodel/conversion/petri_net.hpp"
#include "promodel/powl/order.hpp"

namespace promodel::support {

// Floyd-Warshall reachability on an adjacency matrix.
inline powl::EdgeSet floyd_warshall_closure(const powl::EdgeSet& edges, std::size_t n) {
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (const auto& [i, j] : edges) {
        reach[i][j] = true;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[i][k] && reach[k][j]) {
                    reach[i][j] = true;
                }
            }
        }
    }
    powl::EdgeSet out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (reach[i][j]) {
                out.emplace(i, j);
            }
        }
    }
    return out;
}

struct OracleVerdict {
    bool sound = false;
    bool bounded = true;
    bool cannot_complete = false;
    bool improper = false;
    bool dead = false;
    bool shape_ok = true;
};

// Soundness by fixpoint iteration over an explicit marking set. Any place
// exceeding `token_bound` tokens is taken as evidence of unboundedness.
inline OracleVerdict brute_force_soundness(const conversion::PetriNet& net, std::uint32_t token_bound = 6) {
    using conversion::Marking;
    OracleVerdict verdict;
    const auto& ts = net.transitions();
    const auto np = net.places().size();

    // workflow shape: one source, one sink, markings on them, connectivity
    std::vector<int> in(np, 0), out(np, 0);
    for (const auto& t : ts) {
        for (auto p : t.preset) out[p]++;
        for (auto p : t.postset) in[p]++;
    }
    int sources = 0, sinks = 0;
    std::size_t source = 0, sink = 0;
    for (std::size_t p = 0; p < np; ++p) {
        if (in[p] == 0) { ++sources; source = p; }
        if (out[p] == 0) { ++sinks; sink = p; }
    }
    if (sources != 1 || sinks != 1) {
        verdict.shape_ok = false;
    } else {
        Marking mi(np, 0), mf(np, 0);
        mi[source] = 1;
        mf[sink] = 1;
        if (mi != net.initial_marking() || mf != net.final_marking()) verdict.shape_ok = false;
        // node graph: places 0..np-1, transitions np..np+nt-1
        const auto nn = np + ts.size();
        std::vector<std::vector<bool>> r(nn, std::vector<bool>(nn, false));
        for (std::size_t t = 0; t < ts.size(); ++t) {
            for (auto p : ts[t].preset) r[p][np + t] = true;
            for (auto p : ts[t].postset) r[np + t][p] = true;
        }
        for (std::size_t k = 0; k < nn; ++k)
            for (std::size_t i = 0; i < nn; ++i)
                for (std::size_t j = 0; j < nn; ++j)
                    if (r[i][k] && r[k][j]) r[i][j] = true;
        for (std::size_t v = 0; v < nn; ++v) {
            const bool from_source = v == source || r[source][v];
            const bool to_sink = v == sink || r[v][sink];
            if (!from_source || !to_sink) verdict.shape_ok = false;
        }
    }

    std::set<Marking> reachable{net.initial_marking()};
    std::vector<bool> fired(ts.size(), false);
    for (bool grew = true; grew && verdict.bounded;) {
        grew = false;
        const std::set<Marking> snapshot = reachable;
        for (const auto& m : snapshot) {
            for (std::size_t t = 0; t < ts.size(); ++t) {
                Marking next = m;
                bool ok = true;
                for (auto p : ts[t].preset) {
                    if (next[p] == 0) { ok = false; break; }
                    --next[p];
                }
                if (!ok) continue;
                for (auto p : ts[t].postset) ++next[p];
                fired[t] = true;
                for (auto v : next) {
                    if (v > token_bound) verdict.bounded = false;
                }
                if (reachable.insert(next).second) grew = true;
            }
        }
    }
    if (!verdict.bounded) {
        verdict.sound = false;
        return verdict;
    }
    // backward fixpoint: markings that can reach the final marking
    std::set<Marking> good;
    if (reachable.count(net.final_marking())) good.insert(net.final_marking());
    for (bool grew = true; grew;) {
        grew = false;
        for (const auto& m : reachable) {
            if (good.count(m)) continue;
            for (const auto& t : ts) {
                Marking next = m;
                bool ok = true;
                for (auto p : t.preset) {
                    if (next[p] == 0) { ok = false; break; }
                    --next[p];
                }
                if (!ok) continue;
                for (auto p : t.postset) ++next[p];
                if (good.count(next)) {
                    good.insert(m);
                    grew = true;
                    break;
                }
            }
        }
    }
    verdict.cannot_complete = good.size() != reachable.size();
    for (const auto& m : reachable) {
        bool ge = true, strict = false;
        for (std::size_t p = 0; p < np; ++p) {
            if (m[p] < net.final_marking()[p]) ge = false;
            if (m[p] > net.final_marking()[p]) strict = true;
        }
        if (ge && strict) verdict.improper = true;
    }
    for (bool f : fired) {
        if (!f) verdict.dead = true;
    }
    verdict.sound = verdict.shape_ok && !verdict.cannot_complete && !verdict.improper && !verdict.dead;
    return verdict;
}

} // namespace promodel::support
