#pragma once

#include <string>
#include <vector>

#include "promodel/error.hpp"
#include "promodel/conversion/petri_net.hpp"
#include "promodel/powl/model.hpp"
#include "promodel/powl/order.hpp"
#include "promodel/powl/validate.hpp"

namespace promodel::conversion {

namespace detail {

// Every fragment is built between an entry and an exit place and keeps two
// invariants: it never puts tokens into its entry place and never takes
// tokens from its exit place. That is what makes it safe to let xor branches
// share entry/exit places and to fuse places along partial-order edges.
class NetBuilder {
public:
    explicit NetBuilder(PetriNet& net) : net_(net) {}

    void build(const powl::PowlModel& model, std::size_t in, std::size_t out) {
        using namespace powl;
        switch (model.kind()) {
        case Kind::Activity:
            connect(in, net_.add_transition(model.label()), out);
            break;
        case Kind::Silent:
            connect(in, net_.add_transition(std::nullopt), out);
            break;
        case Kind::Xor:
            for (const auto& child : model.as<Xor>().children) {
                build(child, in, out);
            }
            break;
        case Kind::Loop:
            build_loop(model.as<Loop>(), in, out);
            break;
        case Kind::PartialOrder:
            build_order(model.as<PartialOrder>(), in, out);
            break;
        }
    }

private:
    void connect(std::size_t in, std::size_t transition, std::size_t out) {
        net_.add_input(in, transition);
        net_.add_output(transition, out);
    }

    // in -enter-> body_in -[do]-> body_out -exit-> out
    //                ^                |
    //                +--[redo]-- redo_in <-redo-+
    void build_loop(const powl::Loop& loop, std::size_t in, std::size_t out) {
        const auto id = net_.new_loop();
        const auto body_in = net_.add_place();
        const auto body_out = net_.add_place();
        const auto redo_in = net_.add_place();
        connect(in, net_.add_transition(std::nullopt, {LoopRole::Enter, id}), body_in);
        build(loop.body, body_in, body_out);
        connect(body_out, net_.add_transition(std::nullopt, {LoopRole::Exit, id}), out);
        connect(body_out, net_.add_transition(std::nullopt, {LoopRole::Redo, id}), redo_in);
        build(loop.redo, redo_in, body_in);
    }

    // One place per edge of the transitive reduction. Silent split/join
    // transitions are only added where a node has several successors or
    // predecessors; single edges fuse the exit of one node with the entry of
    // the next.
    void build_order(const powl::PartialOrder& order, std::size_t in, std::size_t out) {
        const auto n = order.nodes.size();
        const auto reduction = powl::transitive_reduction(order.edges, n);
        std::vector<std::vector<std::size_t>> in_edges(n), out_edges(n);
        std::vector<std::size_t> edge_place;
        std::size_t e = 0;
        for (const auto& [from, to] : reduction) {
            edge_place.push_back(net_.add_place());
            out_edges[from].push_back(e);
            in_edges[to].push_back(e);
            ++e;
        }
        std::vector<std::size_t> sources, sinks;
        for (std::size_t k = 0; k < n; ++k) {
            if (in_edges[k].empty()) {
                sources.push_back(k);
            }
            if (out_edges[k].empty()) {
                sinks.push_back(k);
            }
        }

        std::vector<std::size_t> entry(n), exit(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (in_edges[k].empty()) {
                entry[k] = sources.size() == 1 ? in : net_.add_place();
            } else if (in_edges[k].size() == 1) {
                entry[k] = edge_place[in_edges[k][0]];
            } else {
                entry[k] = net_.add_place();
                const auto join = net_.add_transition(std::nullopt);
                for (auto edge : in_edges[k]) {
                    net_.add_input(edge_place[edge], join);
                }
                net_.add_output(join, entry[k]);
            }
            if (out_edges[k].empty()) {
                exit[k] = sinks.size() == 1 ? out : net_.add_place();
            } else if (out_edges[k].size() == 1) {
                exit[k] = edge_place[out_edges[k][0]];
            } else {
                exit[k] = net_.add_place();
                const auto split = net_.add_transition(std::nullopt);
                net_.add_input(exit[k], split);
                for (auto edge : out_edges[k]) {
                    net_.add_output(split, edge_place[edge]);
                }
            }
        }
        if (sources.size() > 1) {
            const auto start = net_.add_transition(std::nullopt);
            net_.add_input(in, start);
            for (auto k : sources) {
                net_.add_output(start, entry[k]);
            }
        }
        if (sinks.size() > 1) {
            const auto end = net_.add_transition(std::nullopt);
            for (auto k : sinks) {
                net_.add_input(exit[k], end);
            }
            net_.add_output(end, out);
        }
        for (std::size_t k = 0; k < n; ++k) {
            build(order.nodes[k], entry[k], exit[k]);
        }
    }

    PetriNet& net_;
};

} // namespace detail

// Workflow net whose visible language equals the model's. Place 0 is the
// source and place 1 the sink.
inline PetriNet to_petri_net(const powl::PowlModel& model) {
    const auto violations = powl::validate(model);
    if (!violations.empty()) {
        throw Error(ErrorCode::ValidationFailed, "cannot convert an invalid model: " + violations.front().message);
    }
    PetriNet net;
    const auto source = net.add_place("source");
    const auto sink = net.add_place("sink");
    net.initial_marking()[source] = 1;
    detail::NetBuilder(net).build(model, source, sink);
    net.final_marking()[sink] = 1;
    return net;
}

} // namespace promodel::conversion
