#pragma once

// Hand-built nets with the defects seen in models produced without a
// soundness-preserving intermediate language.

#include "promodel/conversion/petri_net.hpp"

namespace promodel::support {

namespace detail {

inline void arc_in(conversion::PetriNet& net, std::size_t p, std::size_t t) { net.add_input(p, t); }
inline void arc_out(conversion::PetriNet& net, std::size_t t, std::size_t p) { net.add_output(t, p); }

} // namespace detail

// Online shop: an exclusive choice between paying and agreeing on
// installments, followed by a parallel join that waits for both.
inline conversion::PetriNet xor_split_and_join_net() {
    using detail::arc_in;
    using detail::arc_out;
    conversion::PetriNet net;
    net.name = "shop-xor-and";
    const auto source = net.add_place("source");
    const auto sink = net.add_place("sink");
    const auto chosen = net.add_place();
    const auto paid = net.add_place();
    const auto agreed = net.add_place();
    const auto checkout = net.add_transition("Check out");
    arc_in(net, source, checkout);
    arc_out(net, checkout, chosen);
    const auto pay = net.add_transition("Pay");
    arc_in(net, chosen, pay);
    arc_out(net, pay, paid);
    const auto install = net.add_transition("Complete installment agreement");
    arc_in(net, chosen, install);
    arc_out(net, install, agreed);
    const auto deliver = net.add_transition("Deliver products");
    arc_in(net, paid, deliver);
    arc_in(net, agreed, deliver);
    arc_out(net, deliver, sink);
    net.initial_marking()[source] = 1;
    net.final_marking()[sink] = 1;
    return net;
}

// Hotel room service: after the second "Readies cart" the run waits on a
// join whose other input is only produced on the drinks branch, so the end
// is unreachable.
inline conversion::PetriNet unreachable_end_net() {
    using detail::arc_in;
    using detail::arc_out;
    conversion::PetriNet net;
    net.name = "hotel-unreachable-end";
    const auto source = net.add_place("source");
    const auto sink = net.add_place("sink");
    const auto ordered = net.add_place();
    const auto drinks = net.add_place();
    const auto food = net.add_place();
    const auto cart_for_food = net.add_place();
    const auto delivered = net.add_place();

    const auto take = net.add_transition("Take order");
    arc_in(net, source, take);
    arc_out(net, take, ordered);
    const auto pour = net.add_transition("Prepare drinks");
    arc_in(net, ordered, pour);
    arc_out(net, pour, drinks);
    const auto cook = net.add_transition("Prepare food");
    arc_in(net, ordered, cook);
    arc_out(net, cook, food);
    const auto cart1 = net.add_transition("Readies cart");
    arc_in(net, drinks, cart1);
    arc_out(net, cart1, delivered);
    const auto cart2 = net.add_transition("Readies cart");
    arc_in(net, food, cart2);
    arc_out(net, cart2, cart_for_food);
    const auto deliver = net.add_transition("Deliver to room");
    arc_in(net, delivered, deliver);
    arc_out(net, deliver, sink);
    const auto join = net.add_transition("Deliver to room");
    arc_in(net, cart_for_food, join);
    arc_in(net, delivered, join); // only ever marked on the drinks branch
    arc_out(net, join, sink);
    net.initial_marking()[source] = 1;
    net.final_marking()[sink] = 1;
    return net;
}

} // namespace promodel::support
