#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "promodel/error.hpp"
#include "promodel/powl/model.hpp"
#include "promodel/powl/order.hpp"
#include "promodel/powl/validate.hpp"

namespace promodel::semantics {

// Visible events only; silent steps leave no trace.
using Trace = std::vector<std::string>;
using TraceSet = std::set<Trace>;

struct LanguageOptions {
    std::size_t cap = 100000;  // max traces in any intermediate set
    bool allow_shared = false; // tolerate SharedSubmodel (tree semantics)
};

namespace detail {

inline void guard(std::size_t size, std::size_t cap) {
    if (size > cap) {
        throw Error(ErrorCode::ExplosionGuard,
                    "trace enumeration exceeded the cap of " + std::to_string(cap) + " traces");
    }
}

// Depth-first interleaving of one fixed trace per node. `preds[j]` lists the
// nodes that must be complete before node j emits its first event.
class Shuffler {
public:
    Shuffler(const std::vector<const Trace*>& parts, const std::vector<std::vector<std::size_t>>& preds,
             TraceSet& out, std::size_t cap)
        : parts_(parts), preds_(preds), out_(out), cap_(cap), position_(parts.size(), 0) {
        std::size_t total = 0;
        for (const auto* part : parts_) {
            total += part->size();
        }
        total_ = total;
        current_.reserve(total);
    }

    void run() { step(); }

private:
    bool done(std::size_t node) const { return position_[node] == parts_[node]->size(); }

    bool eligible(std::size_t node) const {
        if (done(node)) {
            return false;
        }
        for (auto pred : preds_[node]) {
            if (!done(pred)) {
                return false;
            }
        }
        return true;
    }

    void step() {
        if (current_.size() == total_) {
            out_.insert(current_);
            guard(out_.size(), cap_);
            return;
        }
        for (std::size_t node = 0; node < parts_.size(); ++node) {
            if (!eligible(node)) {
                continue;
            }
            current_.push_back((*parts_[node])[position_[node]]);
            ++position_[node];
            step();
            --position_[node];
            current_.pop_back();
        }
    }

    const std::vector<const Trace*>& parts_;
    const std::vector<std::vector<std::size_t>>& preds_;
    TraceSet& out_;
    std::size_t cap_;
    std::vector<std::size_t> position_;
    std::size_t total_ = 0;
    Trace current_;
};

inline std::vector<std::vector<std::size_t>> predecessors(const powl::EdgeSet& closure, std::size_t n) {
    std::vector<std::vector<std::size_t>> preds(n);
    for (const auto& [from, to] : closure) {
        preds[to].push_back(from);
    }
    return preds;
}

inline TraceSet language_of(const powl::PowlModel& model, std::size_t max_loop, std::size_t max_len,
                            std::size_t cap) {
    using namespace powl;
    switch (model.kind()) {
    case Kind::Activity:
        return max_len >= 1 ? TraceSet{Trace{model.label()}} : TraceSet{};
    case Kind::Silent:
        return TraceSet{Trace{}};
    case Kind::Xor: {
        TraceSet out;
        for (const auto& child : model.as<Xor>().children) {
            auto part = language_of(child, max_loop, max_len, cap);
            out.insert(part.begin(), part.end());
            guard(out.size(), cap);
        }
        return out;
    }
    case Kind::Loop: {
        const auto body = language_of(model.as<Loop>().body, max_loop, max_len, cap);
        const auto redo = language_of(model.as<Loop>().redo, max_loop, max_len, cap);
        TraceSet out = body;
        TraceSet frontier = body;
        for (std::size_t round = 0; round < max_loop && !frontier.empty(); ++round) {
            TraceSet next;
            for (const auto& prefix : frontier) {
                for (const auto& r : redo) {
                    if (prefix.size() + r.size() > max_len) {
                        continue;
                    }
                    for (const auto& d : body) {
                        if (prefix.size() + r.size() + d.size() > max_len) {
                            continue;
                        }
                        Trace t = prefix;
                        t.insert(t.end(), r.begin(), r.end());
                        t.insert(t.end(), d.begin(), d.end());
                        next.insert(std::move(t));
                    }
                }
                guard(next.size(), cap);
            }
            out.insert(next.begin(), next.end());
            guard(out.size(), cap);
            frontier = std::move(next);
        }
        return out;
    }
    case Kind::PartialOrder: {
        const auto& order = model.as<PartialOrder>();
        const auto n = order.nodes.size();
        std::vector<std::vector<Trace>> parts(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto lang = language_of(order.nodes[i], max_loop, max_len, cap);
            parts[i].assign(lang.begin(), lang.end());
            if (parts[i].empty()) {
                return {};
            }
        }
        const auto preds = predecessors(transitive_closure(order.edges, n), n);
        TraceSet out;
        std::vector<const Trace*> chosen(n, nullptr);
        std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t node, std::size_t length) {
            if (node == n) {
                Shuffler(chosen, preds, out, cap).run();
                return;
            }
            for (const auto& t : parts[node]) {
                if (length + t.size() > max_len) {
                    continue;
                }
                chosen[node] = &t;
                choose(node + 1, length + t.size());
            }
        };
        choose(0, 0);
        return out;
    }
    }
    return {};
}

inline void require_valid(const powl::PowlModel& model, bool allow_shared) {
    for (const auto& v : powl::validate(model)) {
        if (allow_shared && v.kind == powl::ViolationKind::SharedSubmodel) {
            continue;
        }
        throw Error(ErrorCode::ValidationFailed, "model is not valid: " + v.message);
    }
}

} // namespace detail

// All completed traces with at most `max_loop` redo rounds per loop execution
// and at most `max_len` events.
inline TraceSet bounded_language(const powl::PowlModel& model, std::size_t max_loop, std::size_t max_len,
                                 const LanguageOptions& options = {}) {
    detail::require_valid(model, options.allow_shared);
    return detail::language_of(model, max_loop, max_len, options.cap);
}

// Interleavings of `traces` that keep each trace's internal order and put all
// of trace i before all of trace j for every (i, j) in `closure_edges`.
inline TraceSet order_preserving_shuffles(const std::vector<Trace>& traces, const powl::EdgeSet& closure_edges,
                                          std::size_t cap = 100000) {
    if (!powl::is_acyclic(closure_edges, traces.size())) {
        throw Error(ErrorCode::CycleInPartialOrder, "shuffle constraints must be acyclic");
    }
    std::vector<const Trace*> parts;
    for (const auto& t : traces) {
        parts.push_back(&t);
    }
    const auto preds = detail::predecessors(powl::transitive_closure(closure_edges, traces.size()), traces.size());
    TraceSet out;
    detail::Shuffler(parts, preds, out, cap).run();
    return out;
}

inline bool contains_trace(const powl::PowlModel& model, const Trace& trace, std::size_t max_loop,
                           const LanguageOptions& options = {}) {
    return bounded_language(model, max_loop, trace.size(), options).count(trace) > 0;
}

inline std::string format_trace(const Trace& trace) {
    std::string text = "<";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        text += (i ? ", " : "") + trace[i];
    }
    return text + ">";
}

} // namespace promodel::semantics
