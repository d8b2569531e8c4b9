#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "promodel/conversion/petri_net.hpp"
#include "promodel/error.hpp"
#include "promodel/semantics/language.hpp"

namespace promodel::conversion {

struct NetLanguageOptions {
    std::size_t max_len = 10;
    std::size_t state_cap = 1000000; // configurations visited across all silent closures
    // When set, a loop fragment may take at most this many redo rounds per
    // execution, using the loop tags placed by to_petri_net.
    std::optional<std::size_t> max_loop;
};

namespace detail {

struct ConfigHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) {
            h = (h ^ x) * 1099511628211ull;
        }
        return h;
    }
};

// Subset construction over configurations (marking ++ loop redo counters).
// Suffix languages are memoized per (silent-closed configuration set,
// remaining length), so interleavings that reach the same state share work.
class NetLanguageSearch {
public:
    using Config = std::vector<std::uint32_t>;
    using StateSet = std::vector<Config>; // sorted, unique

    NetLanguageSearch(const PetriNet& net, const NetLanguageOptions& options) : net_(net), options_(options) {
        for (const auto& t : net.transitions()) {
            if (t.label) {
                auto [it, inserted] = label_ids_.try_emplace(*t.label, labels_.size());
                if (inserted) {
                    labels_.push_back(*t.label);
                }
                transition_label_.push_back(it->second);
            } else {
                transition_label_.push_back(0);
            }
        }
    }

    semantics::TraceSet run() {
        Config start(net_.initial_marking().begin(), net_.initial_marking().end());
        start.resize(net_.places().size() + net_.loop_count(), 0);
        return suffixes(closure({start}), options_.max_len);
    }

private:
    std::optional<Config> step(const Config& config, std::size_t t) const {
        const auto& tr = net_.transitions()[t];
        Config next = config;
        for (auto p : tr.preset) {
            if (next[p] == 0) {
                return std::nullopt;
            }
            --next[p];
        }
        for (auto p : tr.postset) {
            ++next[p];
        }
        if (options_.max_loop && tr.loop.role != LoopRole::None) {
            auto& counter = next[net_.places().size() + tr.loop.loop];
            if (tr.loop.role == LoopRole::Redo) {
                if (counter >= *options_.max_loop) {
                    return std::nullopt;
                }
                ++counter;
            } else {
                counter = 0;
            }
        }
        return next;
    }

    StateSet closure(std::vector<Config> seeds) {
        std::unordered_set<Config, ConfigHash> seen(seeds.begin(), seeds.end());
        std::vector<Config> stack(seen.begin(), seen.end());
        const auto& transitions = net_.transitions();
        while (!stack.empty()) {
            const Config config = std::move(stack.back());
            stack.pop_back();
            for (std::size_t t = 0; t < transitions.size(); ++t) {
                if (!transitions[t].silent()) {
                    continue;
                }
                if (auto next = step(config, t); next && seen.insert(*next).second) {
                    stack.push_back(std::move(*next));
                }
            }
        }
        work_ += seen.size();
        if (work_ > options_.state_cap) {
            throw Error(ErrorCode::StateCapExceeded, "net language enumeration exceeded " +
                                                         std::to_string(options_.state_cap) + " configurations");
        }
        StateSet set(seen.begin(), seen.end());
        std::sort(set.begin(), set.end());
        return set;
    }

    bool accepting(const StateSet& set) const {
        const auto n = net_.places().size();
        const auto& final = net_.final_marking();
        return std::any_of(set.begin(), set.end(),
                           [&](const Config& c) { return std::equal(final.begin(), final.end(), c.begin(), c.begin() + n); });
    }

    const semantics::TraceSet& suffixes(const StateSet& set, std::size_t remaining) {
        auto key = std::make_pair(remaining, set);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
        semantics::TraceSet result;
        if (accepting(set)) {
            result.insert(semantics::Trace{});
        }
        if (remaining > 0) {
            std::map<std::uint32_t, std::vector<Config>> successors;
            for (const auto& config : set) {
                for (std::size_t t = 0; t < net_.transitions().size(); ++t) {
                    if (net_.transitions()[t].silent()) {
                        continue;
                    }
                    if (auto next = step(config, t)) {
                        successors[transition_label_[t]].push_back(std::move(*next));
                    }
                }
            }
            for (auto& [label, seeds] : successors) {
                const auto& tails = suffixes(closure(std::move(seeds)), remaining - 1);
                for (const auto& tail : tails) {
                    semantics::Trace trace;
                    trace.reserve(tail.size() + 1);
                    trace.push_back(labels_[label]);
                    trace.insert(trace.end(), tail.begin(), tail.end());
                    result.insert(std::move(trace));
                }
            }
        }
        return memo_.emplace(std::move(key), std::move(result)).first->second;
    }

    const PetriNet& net_;
    const NetLanguageOptions& options_;
    std::map<std::string, std::uint32_t> label_ids_;
    std::vector<std::string> labels_;
    std::vector<std::uint32_t> transition_label_;
    std::map<std::pair<std::size_t, StateSet>, semantics::TraceSet> memo_;
    std::size_t work_ = 0;
};

} // namespace detail

// Visible label sequences of complete firing sequences (initial to final
// marking) with at most max_len visible events. Silent transitions are
// collapsed; silent cycles are handled by the closure's visited set.
inline semantics::TraceSet bounded_net_language(const PetriNet& net, const NetLanguageOptions& options) {
    net.check_invariants();
    if (options.state_cap < 1) {
        throw Error(ErrorCode::PreconditionFailed, "state cap must be at least 1");
    }
    return detail::NetLanguageSearch(net, options).run();
}

inline semantics::TraceSet bounded_net_language(const PetriNet& net, std::size_t max_len,
                                                std::size_t state_cap = 1000000) {
    NetLanguageOptions options;
    options.max_len = max_len;
    options.state_cap = state_cap;
    return bounded_net_language(net, options);
}

} // namespace promodel::conversion
