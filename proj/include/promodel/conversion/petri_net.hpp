#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promodel/error.hpp"

namespace promodel::conversion {

using Marking = std::vector<std::uint32_t>; // token count per place index

// Role of a silent transition in the net fragment of a POWL loop. Lets the
// language enumerator bound redo rounds exactly like the POWL semantics does.
enum class LoopRole { None, Enter, Redo, Exit };

struct LoopTag {
    LoopRole role = LoopRole::None;
    std::size_t loop = 0;
};

struct Place {
    std::string id;
    std::string name;
};

struct Transition {
    std::string id;
    std::optional<std::string> label; // nullopt: silent
    LoopTag loop;
    std::vector<std::size_t> preset;
    std::vector<std::size_t> postset;

    bool silent() const { return !label.has_value(); }
};

class PetriNet {
public:
    std::string name = "net";

    std::size_t add_place(std::string name = {}) {
        const auto index = places_.size();
        places_.push_back({"p" + std::to_string(index), std::move(name)});
        initial_.push_back(0);
        final_.push_back(0);
        return index;
    }

    std::size_t add_transition(std::optional<std::string> label, LoopTag loop = {}) {
        const auto index = transitions_.size();
        transitions_.push_back({"t" + std::to_string(index), std::move(label), loop, {}, {}});
        return index;
    }

    void add_input(std::size_t place, std::size_t transition) {
        check(place, transition);
        transitions_[transition].preset.push_back(place);
    }

    void add_output(std::size_t transition, std::size_t place) {
        check(place, transition);
        transitions_[transition].postset.push_back(place);
    }

    std::size_t new_loop() { return loops_++; }

    const std::vector<Place>& places() const { return places_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    std::vector<Transition>& transitions() { return transitions_; }
    std::size_t loop_count() const { return loops_; }

    Marking& initial_marking() { return initial_; }
    Marking& final_marking() { return final_; }
    const Marking& initial_marking() const { return initial_; }
    const Marking& final_marking() const { return final_; }

    std::size_t arc_count() const {
        std::size_t count = 0;
        for (const auto& t : transitions_) {
            count += t.preset.size() + t.postset.size();
        }
        return count;
    }

    std::size_t silent_count() const {
        std::size_t count = 0;
        for (const auto& t : transitions_) {
            count += t.silent() ? 1 : 0;
        }
        return count;
    }

    // Structural sanity: arcs in range, markings sized to the place set.
    void check_invariants() const {
        if (initial_.size() != places_.size() || final_.size() != places_.size()) {
            throw Error(ErrorCode::InvariantViolated, "marking size does not match place count");
        }
        for (const auto& t : transitions_) {
            for (auto p : t.preset) {
                if (p >= places_.size()) {
                    throw Error(ErrorCode::InvariantViolated, "arc references unknown place");
                }
            }
            for (auto p : t.postset) {
                if (p >= places_.size()) {
                    throw Error(ErrorCode::InvariantViolated, "arc references unknown place");
                }
            }
        }
    }

    // Removes places and transitions for which `keep_*` is false and
    // renumbers ids densely. Arcs touching removed places are dropped.
    void compact(const std::vector<char>& keep_place, const std::vector<char>& keep_transition) {
        std::vector<std::size_t> remap(places_.size(), SIZE_MAX);
        std::vector<Place> places;
        Marking initial;
        Marking final;
        for (std::size_t p = 0; p < places_.size(); ++p) {
            if (keep_place[p]) {
                remap[p] = places.size();
                places.push_back({"p" + std::to_string(places.size()), places_[p].name});
                initial.push_back(initial_[p]);
                final.push_back(final_[p]);
            }
        }
        std::vector<Transition> transitions;
        for (std::size_t t = 0; t < transitions_.size(); ++t) {
            if (!keep_transition[t]) {
                continue;
            }
            Transition copy = transitions_[t];
            copy.id = "t" + std::to_string(transitions.size());
            auto rewrite = [&](std::vector<std::size_t>& arcs) {
                std::vector<std::size_t> kept;
                for (auto p : arcs) {
                    if (remap[p] != SIZE_MAX) {
                        kept.push_back(remap[p]);
                    }
                }
                arcs = std::move(kept);
            };
            rewrite(copy.preset);
            rewrite(copy.postset);
            transitions.push_back(std::move(copy));
        }
        places_ = std::move(places);
        transitions_ = std::move(transitions);
        initial_ = std::move(initial);
        final_ = std::move(final);
    }

private:
    void check(std::size_t place, std::size_t transition) const {
        if (place >= places_.size() || transition >= transitions_.size()) {
            throw Error(ErrorCode::InvariantViolated, "arc references a node that does not exist");
        }
    }

    std::vector<Place> places_;
    std::vector<Transition> transitions_;
    Marking initial_;
    Marking final_;
    std::size_t loops_ = 0;
};

inline bool enabled(const Transition& t, const Marking& marking) {
    // a place may appear twice in a preset only through hand-built nets;
    // count occurrences to stay correct for arc weights > 1
    for (std::size_t i = 0; i < t.preset.size(); ++i) {
        std::uint32_t need = 0;
        for (auto p : t.preset) {
            need += p == t.preset[i] ? 1 : 0;
        }
        if (marking[t.preset[i]] < need) {
            return false;
        }
    }
    return true;
}

inline Marking fire(const Transition& t, Marking marking) {
    for (auto p : t.preset) {
        --marking[p];
    }
    for (auto p : t.postset) {
        ++marking[p];
    }
    return marking;
}

} // namespace promodel::conversion
