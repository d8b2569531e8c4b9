#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "promodel/conversion/bpmn.hpp"
#include "promodel/conversion/export.hpp"
#include "promodel/conversion/to_petri_net.hpp"
#include "promodel/powl/json.hpp"

namespace promodel::conversion {

enum class Format { PowlJson, Pnml, Bpmn };

inline std::optional<Format> parse_format(std::string_view text) {
    if (text == "powl-json") return Format::PowlJson;
    if (text == "pnml") return Format::Pnml;
    if (text == "bpmn") return Format::Bpmn;
    return std::nullopt;
}

inline std::string_view to_string(Format f) {
    switch (f) {
    case Format::PowlJson: return "powl-json";
    case Format::Pnml: return "pnml";
    case Format::Bpmn: return "bpmn";
    }
    return "unknown";
}

inline std::string_view content_type(Format f) {
    return f == Format::PowlJson ? "application/json" : "application/xml";
}

inline std::string render(const powl::PowlModel& model, Format f) {
    switch (f) {
    case Format::PowlJson: return powl::to_json(model);
    case Format::Pnml: return export_pnml(to_petri_net(model));
    case Format::Bpmn: return export_bpmn_xml(to_bpmn(model));
    }
    return {};
}

} // namespace promodel::conversion
