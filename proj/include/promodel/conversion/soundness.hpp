#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promodel/conversion/petri_net.hpp"
#include "promodel/conversion/reduce.hpp"

namespace promodel::conversion {

enum class SoundnessIssue { NotWorkflowShape, DeadTransition, ImproperCompletion, CannotComplete, StateCapExceeded };

constexpr std::string_view to_string(SoundnessIssue issue) {
    switch (issue) {
    case SoundnessIssue::NotWorkflowShape: return "NotWorkflowShape";
    case SoundnessIssue::DeadTransition: return "DeadTransition";
    case SoundnessIssue::ImproperCompletion: return "ImproperCompletion";
    case SoundnessIssue::CannotComplete: return "CannotComplete";
    case SoundnessIssue::StateCapExceeded: return "StateCapExceeded";
    }
    return "Unknown";
}

struct SoundnessViolation {
    SoundnessIssue kind;
    std::string detail;
};

struct SoundnessReport {
    bool sound = false;
    std::vector<SoundnessViolation> violations;
    std::size_t explored_states = 0;

    bool has(SoundnessIssue kind) const {
        for (const auto& v : violations) {
            if (v.kind == kind) {
                return true;
            }
        }
        return false;
    }
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto v : m) {
            h = (h ^ v) * 1099511628211ull;
        }
        return h;
    }
};

inline std::string format_marking(const PetriNet& net, const Marking& m) {
    std::string text = "[";
    bool first = true;
    for (std::size_t p = 0; p < m.size(); ++p) {
        if (m[p] == 0) {
            continue;
        }
        text += first ? "" : ", ";
        first = false;
        text += net.places()[p].name.empty() ? net.places()[p].id : net.places()[p].name;
        if (m[p] > 1) {
            text += "^" + std::to_string(m[p]);
        }
    }
    return text + "]";
}

inline std::string transition_name(const Transition& t) {
    return t.label ? "'" + *t.label + "' (" + t.id + ")" : "silent " + t.id;
}

// Structural workflow-net conditions. Returns one message per problem.
inline std::vector<std::string> workflow_shape_problems(const PetriNet& net) {
    std::vector<std::string> problems;
    const auto n_places = net.places().size();
    const auto n_trans = net.transitions().size();
    std::vector<std::size_t> in_degree(n_places), out_degree(n_places);
    for (const auto& t : net.transitions()) {
        for (auto p : t.preset) {
            ++out_degree[p];
        }
        for (auto p : t.postset) {
            ++in_degree[p];
        }
    }
    std::vector<std::size_t> sources, sinks;
    for (std::size_t p = 0; p < n_places; ++p) {
        if (in_degree[p] == 0) {
            sources.push_back(p);
        }
        if (out_degree[p] == 0) {
            sinks.push_back(p);
        }
    }
    if (sources.size() != 1) {
        problems.push_back("expected exactly one source place, found " + std::to_string(sources.size()));
    }
    if (sinks.size() != 1) {
        problems.push_back("expected exactly one sink place, found " + std::to_string(sinks.size()));
    }
    if (sources.size() != 1 || sinks.size() != 1) {
        return problems;
    }
    const auto source = sources[0];
    const auto sink = sinks[0];
    Marking expected_initial(n_places, 0), expected_final(n_places, 0);
    expected_initial[source] = 1;
    expected_final[sink] = 1;
    if (net.initial_marking() != expected_initial) {
        problems.push_back("initial marking is not one token on the source place");
    }
    if (net.final_marking() != expected_final) {
        problems.push_back("final marking is not one token on the sink place");
    }

    // every place and transition on a path source -> sink
    auto sweep = [&](bool forward) {
        std::vector<char> place_seen(n_places, 0), trans_seen(n_trans, 0);
        std::deque<std::size_t> queue{forward ? source : sink};
        place_seen[queue.front()] = 1;
        while (!queue.empty()) {
            const auto p = queue.front();
            queue.pop_front();
            for (std::size_t t = 0; t < n_trans; ++t) {
                const auto& tr = net.transitions()[t];
                const auto& from = forward ? tr.preset : tr.postset;
                const auto& to = forward ? tr.postset : tr.preset;
                if (trans_seen[t] || std::find(from.begin(), from.end(), p) == from.end()) {
                    continue;
                }
                trans_seen[t] = 1;
                for (auto q : to) {
                    if (!place_seen[q]) {
                        place_seen[q] = 1;
                        queue.push_back(q);
                    }
                }
            }
        }
        return std::make_pair(place_seen, trans_seen);
    };
    const auto [fwd_places, fwd_trans] = sweep(true);
    const auto [bwd_places, bwd_trans] = sweep(false);
    for (std::size_t p = 0; p < n_places; ++p) {
        if (!fwd_places[p] || !bwd_places[p]) {
            problems.push_back("place " + net.places()[p].id + " is not on a path from source to sink");
        }
    }
    for (std::size_t t = 0; t < n_trans; ++t) {
        if (!fwd_trans[t] || !bwd_trans[t]) {
            problems.push_back("transition " + transition_name(net.transitions()[t]) +
                               " is not on a path from source to sink");
        }
    }
    return problems;
}

struct SoundnessOptions {
    std::size_t state_cap = 100000;
    // Explore the net after silent series fusion. The verdict is the same;
    // the state space is usually much smaller.
    bool reduce = true;
};

// Classical soundness by explicit reachability-graph exploration: option to
// complete, proper completion and no dead transitions. A marking that
// strictly covers one of its ancestors proves unboundedness, which a sound
// workflow net cannot have; exploration stops there.
inline SoundnessReport check_soundness(const PetriNet& net, const SoundnessOptions& options) {
    net.check_invariants();
    SoundnessReport report;
    for (auto& problem : workflow_shape_problems(net)) {
        report.violations.push_back({SoundnessIssue::NotWorkflowShape, std::move(problem)});
    }

    std::optional<Reduction> reduction;
    if (options.reduce) {
        reduction = reduce_with_map(net);
    }
    const PetriNet& explored = reduction ? reduction->net : net;
    const auto& transitions = explored.transitions();
    std::vector<Marking> states;
    std::vector<std::size_t> parent;
    std::vector<std::vector<std::size_t>> predecessors; // reverse edges
    std::unordered_map<Marking, std::size_t, MarkingHash> index;
    std::vector<char> fired(transitions.size(), 0);

    auto covers_strictly = [](const Marking& big, const Marking& small) {
        bool strict = false;
        for (std::size_t p = 0; p < big.size(); ++p) {
            if (big[p] < small[p]) {
                return false;
            }
            strict = strict || big[p] > small[p];
        }
        return strict;
    };

    states.push_back(explored.initial_marking());
    parent.push_back(SIZE_MAX);
    predecessors.emplace_back();
    index.emplace(explored.initial_marking(), 0);
    bool unbounded = false;
    bool capped = false;
    for (std::size_t current = 0; current < states.size() && !unbounded && !capped; ++current) {
        for (std::size_t t = 0; t < transitions.size(); ++t) {
            if (!enabled(transitions[t], states[current])) {
                continue;
            }
            fired[t] = 1;
            Marking next = fire(transitions[t], states[current]);
            auto found = index.find(next);
            if (found != index.end()) {
                predecessors[found->second].push_back(current);
                continue;
            }
            for (auto a = current; a != SIZE_MAX; a = parent[a]) {
                if (covers_strictly(next, states[a])) {
                    report.violations.push_back(
                        {SoundnessIssue::ImproperCompletion,
                         "net is unbounded: " + format_marking(explored, next) +
                             " strictly covers the earlier marking " + format_marking(explored, states[a])});
                    unbounded = true;
                    break;
                }
            }
            if (unbounded) {
                break;
            }
            if (states.size() >= options.state_cap) {
                capped = true;
                break;
            }
            index.emplace(next, states.size());
            states.push_back(std::move(next));
            parent.push_back(current);
            predecessors.push_back({current});
        }
    }
    report.explored_states = states.size();

    if (capped) {
        report.violations.push_back({SoundnessIssue::StateCapExceeded, "state space exceeds " +
                                                                           std::to_string(options.state_cap) +
                                                                           " markings; inconclusive"});
    }
    if (!capped && !unbounded) {
        // option to complete: backward reachability from the final marking
        std::vector<char> can_finish(states.size(), 0);
        std::deque<std::size_t> queue;
        if (auto final_it = index.find(explored.final_marking()); final_it != index.end()) {
            can_finish[final_it->second] = 1;
            queue.push_back(final_it->second);
        }
        while (!queue.empty()) {
            const auto s = queue.front();
            queue.pop_front();
            for (auto pred : predecessors[s]) {
                if (!can_finish[pred]) {
                    can_finish[pred] = 1;
                    queue.push_back(pred);
                }
            }
        }
        std::size_t stuck = 0;
        std::size_t example = 0;
        std::size_t improper = 0;
        std::size_t improper_example = 0;
        std::vector<char> marked(explored.places().size(), 0);
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (!can_finish[s]) {
                if (stuck++ == 0) {
                    example = s;
                }
            }
            if (covers_strictly(states[s], explored.final_marking())) {
                if (improper++ == 0) {
                    improper_example = s;
                }
            }
            for (std::size_t p = 0; p < marked.size(); ++p) {
                marked[p] = marked[p] || states[s][p] > 0;
            }
        }
        if (stuck > 0) {
            report.violations.push_back({SoundnessIssue::CannotComplete,
                                         std::to_string(stuck) + " reachable marking(s) cannot reach the final "
                                         "marking, e.g. " + format_marking(explored, states[example])});
        }
        if (improper > 0) {
            report.violations.push_back({SoundnessIssue::ImproperCompletion,
                                         "reachable marking " + format_marking(explored, states[improper_example]) +
                                             " strictly covers the final marking"});
        }
        for (std::size_t t = 0; t < net.transitions().size(); ++t) {
            bool alive = false;
            if (!reduction) {
                alive = fired[t];
            } else if (const auto mapped = reduction->transition_map[t]) {
                alive = fired[*mapped];
            } else {
                // a fused transition fires whenever its merged input place is marked
                alive = marked[reduction->place_map[net.transitions()[t].preset[0]]];
            }
            if (!alive) {
                report.violations.push_back({SoundnessIssue::DeadTransition,
                                             "transition " + transition_name(net.transitions()[t]) + " can never fire"});
            }
        }
    }
    report.sound = report.violations.empty();
    return report;
}

inline SoundnessReport check_soundness(const PetriNet& net, std::size_t state_cap = 100000) {
    SoundnessOptions options;
    options.state_cap = state_cap;
    return check_soundness(net, options);
}

} // namespace promodel::conversion
