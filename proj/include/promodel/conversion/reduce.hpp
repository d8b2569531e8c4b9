#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "promodel/conversion/petri_net.hpp"

namespace promodel::conversion {

struct Reduction {
    PetriNet net;
    std::vector<std::size_t> place_map;                     // original place -> reduced place
    std::vector<std::optional<std::size_t>> transition_map; // nullopt: fused away
};

// Series fusion of silent transitions: a silent t with preset {p} and
// postset {q}, where t is the only consumer of p and the only producer of q,
// is removed and q is merged into p. The visible language and soundness are
// unchanged; t is dead exactly when the merged place is never marked.
// Loop-tagged transitions are kept so bounded-loop enumeration still works
// on the reduced net.
inline Reduction reduce_with_map(PetriNet net) {
    const auto n_places = net.places().size();
    const auto n_transitions = net.transitions().size();
    std::vector<char> keep_place(n_places, 1);
    std::vector<char> keep_transition(n_transitions, 1);
    std::vector<std::size_t> merged_into(n_places);
    for (std::size_t p = 0; p < n_places; ++p) {
        merged_into[p] = p;
    }
    auto& transitions = net.transitions();

    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::size_t> consumers(n_places, 0), producers(n_places, 0);
        for (std::size_t t = 0; t < n_transitions; ++t) {
            if (!keep_transition[t]) {
                continue;
            }
            for (auto p : transitions[t].preset) {
                ++consumers[p];
            }
            for (auto p : transitions[t].postset) {
                ++producers[p];
            }
        }
        for (std::size_t t = 0; t < n_transitions; ++t) {
            const auto& tr = transitions[t];
            if (!keep_transition[t] || !tr.silent() || tr.loop.role != LoopRole::None || tr.preset.size() != 1 ||
                tr.postset.size() != 1) {
                continue;
            }
            const auto p = tr.preset[0];
            const auto q = tr.postset[0];
            if (p == q || consumers[p] != 1 || producers[q] != 1) {
                continue;
            }
            if (net.initial_marking()[p] > 0 && net.final_marking()[q] > 0) {
                continue; // would collapse source and sink into one place
            }
            keep_transition[t] = 0;
            keep_place[q] = 0;
            merged_into[q] = p;
            for (std::size_t u = 0; u < n_transitions; ++u) {
                if (keep_transition[u]) {
                    std::replace(transitions[u].preset.begin(), transitions[u].preset.end(), q, p);
                }
            }
            net.initial_marking()[p] += net.initial_marking()[q];
            net.final_marking()[p] += net.final_marking()[q];
            net.initial_marking()[q] = 0;
            net.final_marking()[q] = 0;
            changed = true;
            break;
        }
    }

    Reduction result;
    std::vector<std::size_t> dense(n_places, 0);
    for (std::size_t p = 0, next = 0; p < n_places; ++p) {
        if (keep_place[p]) {
            dense[p] = next++;
        }
    }
    result.place_map.resize(n_places);
    for (std::size_t p = 0; p < n_places; ++p) {
        auto root = p;
        while (merged_into[root] != root) {
            root = merged_into[root];
        }
        result.place_map[p] = dense[root];
    }
    result.transition_map.resize(n_transitions);
    for (std::size_t t = 0, next = 0; t < n_transitions; ++t) {
        if (keep_transition[t]) {
            result.transition_map[t] = next++;
        }
    }
    net.compact(keep_place, keep_transition);
    result.net = std::move(net);
    return result;
}

inline PetriNet reduce_silent_transitions(PetriNet net) { return reduce_with_map(std::move(net)).net; }

} // namespace promodel::conversion
