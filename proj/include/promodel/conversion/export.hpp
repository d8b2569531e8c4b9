#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "promodel/conversion/bpmn.hpp"
#include "promodel/conversion/petri_net.hpp"
#include "promodel/error.hpp"

namespace promodel::conversion {

inline std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default:
            // control characters other than tab/newline are not allowed in XML 1.0
            if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
                out += ' ';
            } else {
                out += c;
            }
        }
    }
    return out;
}

// PNML place/transition net. Silent transitions carry a toolspecific element
// marking them invisible; final markings follow the common pm4py extension.
inline std::string export_pnml(const PetriNet& net) {
    try {
        net.check_invariants();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvariantViolated, std::string("cannot export PNML: ") + e.what());
    }
    std::ostringstream xml;
    xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml << "<pnml>\n";
    xml << "  <net id=\"" << xml_escape(net.name) << "\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n";
    xml << "    <name>\n      <text>" << xml_escape(net.name) << "</text>\n    </name>\n";
    xml << "    <page id=\"page1\">\n";
    for (std::size_t p = 0; p < net.places().size(); ++p) {
        const auto& place = net.places()[p];
        xml << "      <place id=\"" << place.id << "\">\n";
        xml << "        <name>\n          <text>" << xml_escape(place.name.empty() ? place.id : place.name)
            << "</text>\n        </name>\n";
        if (net.initial_marking()[p] > 0) {
            xml << "        <initialMarking>\n          <text>" << net.initial_marking()[p]
                << "</text>\n        </initialMarking>\n";
        }
        xml << "      </place>\n";
    }
    for (const auto& t : net.transitions()) {
        xml << "      <transition id=\"" << t.id << "\">\n";
        xml << "        <name>\n          <text>" << xml_escape(t.label ? *t.label : t.id) << "</text>\n        </name>\n";
        if (t.silent()) {
            xml << "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\""
                << t.id << "\"/>\n";
        }
        xml << "      </transition>\n";
    }
    std::size_t arc = 0;
    for (const auto& t : net.transitions()) {
        for (auto p : t.preset) {
            xml << "      <arc id=\"a" << arc++ << "\" source=\"" << net.places()[p].id << "\" target=\"" << t.id
                << "\"/>\n";
        }
        for (auto p : t.postset) {
            xml << "      <arc id=\"a" << arc++ << "\" source=\"" << t.id << "\" target=\"" << net.places()[p].id
                << "\"/>\n";
        }
    }
    xml << "    </page>\n";
    xml << "    <finalmarkings>\n      <marking>\n";
    for (std::size_t p = 0; p < net.places().size(); ++p) {
        if (net.final_marking()[p] > 0) {
            xml << "        <place idref=\"" << net.places()[p].id << "\">\n          <text>" << net.final_marking()[p]
                << "</text>\n        </place>\n";
        }
    }
    xml << "      </marking>\n    </finalmarkings>\n";
    xml << "  </net>\n</pnml>\n";
    return xml.str();
}

// BPMN 2.0 process without diagram interchange geometry.
inline std::string export_bpmn_xml(const BpmnModel& model) {
    if (const auto problems = bpmn_problems(model); !problems.empty()) {
        throw Error(ErrorCode::InvariantViolated, "cannot export BPMN: " + problems.front());
    }
    std::ostringstream xml;
    xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    xml << "<definitions xmlns=\"http://www.omg.org/spec/BPMN/20100524/MODEL\" "
           "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
           "id=\"definitions\" targetNamespace=\"http://bpmn.io/schema/bpmn\">\n";
    xml << "  <process id=\"process\" name=\"" << xml_escape(model.name) << "\" isExecutable=\"false\">\n";
    for (const auto& node : model.nodes) {
        std::vector<std::string> incoming, outgoing;
        for (const auto& f : model.flows) {
            if (f.target == node.id) {
                incoming.push_back(f.id);
            }
            if (f.source == node.id) {
                outgoing.push_back(f.id);
            }
        }
        xml << "    <" << to_string(node.kind) << " id=\"" << node.id << "\"";
        if (node.kind == BpmnKind::Task) {
            xml << " name=\"" << xml_escape(node.label) << "\"";
        }
        if (node.kind == BpmnKind::XorGateway || node.kind == BpmnKind::AndGateway) {
            xml << " gatewayDirection=\"" << (outgoing.size() > 1 ? (incoming.size() > 1 ? "Mixed" : "Diverging")
                                                                   : "Converging")
                << "\"";
        }
        xml << ">\n";
        for (const auto& id : incoming) {
            xml << "      <incoming>" << id << "</incoming>\n";
        }
        for (const auto& id : outgoing) {
            xml << "      <outgoing>" << id << "</outgoing>\n";
        }
        xml << "    </" << to_string(node.kind) << ">\n";
    }
    for (const auto& f : model.flows) {
        xml << "    <sequenceFlow id=\"" << f.id << "\" sourceRef=\"" << f.source << "\" targetRef=\"" << f.target
            << "\"/>\n";
    }
    xml << "  </process>\n</definitions>\n";
    return xml.str();
}

} // namespace promodel::conversion
