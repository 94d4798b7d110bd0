#include "careflow/pnml.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace careflow {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kToolName = "careflow";

struct RawArc {
  std::string source;
  std::string target;
  std::uint32_t weight;
};

struct RawNet {
  std::vector<std::pair<std::string, std::uint32_t>> places;
  std::vector<std::pair<std::string, std::optional<std::string>>> transitions;
  std::vector<RawArc> arcs;
  std::optional<std::string> source;
  std::optional<std::string> sink;
  bool has_tool_block = false;
};

std::string attr(const pt::ptree& node, const char* name, const char* element) {
  const auto value = node.get_optional<std::string>(std::string("<xmlattr>.") + name);
  if (!value || value->empty()) {
    throw DataError(std::string("PNML: <") + element + "> without '" + name + "' attribute");
  }
  return *value;
}

std::uint32_t parse_count(const std::string& text, const char* what) {
  std::int64_t v = 0;
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
  if (!parse_int64(trimmed, v) || v < 0 || v > 0xFFFFFFFFLL) {
    throw DataError(std::string("PNML: invalid ") + what + " '" + text + "'");
  }
  return static_cast<std::uint32_t>(v);
}

bool is_invisible_marker(const pt::ptree& node) {
  for (const auto& [tag, child] : node) {
    if (tag != "toolspecific") continue;
    const auto activity = child.get_optional<std::string>("<xmlattr>.activity");
    if (activity && *activity == "$invisible$") return true;
  }
  return false;
}

void collect(const pt::ptree& container, RawNet& net) {
  for (const auto& [tag, node] : container) {
    if (tag == "page") {
      collect(node, net);
    } else if (tag == "place") {
      std::uint32_t tokens = 0;
      if (const auto text = node.get_optional<std::string>("initialMarking.text")) {
        tokens = parse_count(*text, "initial marking");
      }
      net.places.emplace_back(attr(node, "id", "place"), tokens);
    } else if (tag == "transition") {
      std::optional<std::string> label;
      if (const auto text = node.get_optional<std::string>("name.text")) label = *text;
      if (label && (label->empty() || is_invisible_marker(node))) label.reset();
      net.transitions.emplace_back(attr(node, "id", "transition"), std::move(label));
    } else if (tag == "arc") {
      std::uint32_t weight = 1;
      if (const auto text = node.get_optional<std::string>("inscription.text")) {
        weight = parse_count(*text, "arc inscription");
        if (weight == 0) throw DataError("PNML: arc inscription must be positive");
      }
      net.arcs.push_back(RawArc{attr(node, "source", "arc"), attr(node, "target", "arc"), weight});
    } else if (tag == "toolspecific") {
      if (node.get<std::string>("<xmlattr>.tool", "") != kToolName) continue;
      net.has_tool_block = true;
      if (const auto s = node.get_optional<std::string>("source.<xmlattr>.idref")) net.source = *s;
      if (const auto s = node.get_optional<std::string>("sink.<xmlattr>.idref")) net.sink = *s;
    }
  }
}

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

PetriNet parse_pnml(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw DataError(std::string("PNML: malformed XML: ") + e.what());
  }
  const auto root = tree.get_child_optional("pnml");
  if (!root) throw DataError("PNML: missing <pnml> root element");
  const auto net_node = root->get_child_optional("net");
  if (!net_node) throw DataError("PNML: missing <net> element");

  RawNet raw;
  collect(*net_node, raw);

  PetriNet net;
  try {
    for (auto& [id, tokens] : raw.places) {
      net.add_place(id);
      net.set_initial_tokens(id, tokens);
    }
    for (auto& [id, label] : raw.transitions) net.add_transition(id, label);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("PNML: ") + e.what());
  }
  for (const auto& arc : raw.arcs) {
    const bool source_known = net.find_place(arc.source) || net.find_transition(arc.source);
    const bool target_known = net.find_place(arc.target) || net.find_transition(arc.target);
    if (!source_known || !target_known) {
      throw DataError("PNML: dangling arc reference " + arc.source + " -> " + arc.target);
    }
    try {
      net.add_arc(arc.source, arc.target, arc.weight);
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("PNML: ") + e.what());
    }
  }

  if (!raw.has_tool_block) {
    std::vector<bool> has_in(net.place_count(), false), has_out(net.place_count(), false);
    for (const auto& a : net.arcs()) {
      (a.direction == ArcDirection::TransitionToPlace ? has_in : has_out)[a.place] = true;
    }
    std::vector<PlaceIndex> sources, sinks;
    for (PlaceIndex p = 0; p < net.place_count(); ++p) {
      if (!has_in[p]) sources.push_back(p);
      if (!has_out[p]) sinks.push_back(p);
    }
    if (sources.size() == 1) raw.source = net.places()[sources.front()];
    if (sinks.size() == 1) raw.sink = net.places()[sinks.front()];
    if (raw.source == raw.sink) raw.source.reset(), raw.sink.reset();
  }
  try {
    if (raw.source) net.set_source(*raw.source);
    if (raw.sink) net.set_sink(*raw.sink);
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("PNML: ") + e.what());
  }
  return net;
}

void write_pnml(std::ostream& out, const PetriNet& net) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml>\n";
  out << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n";
  out << "    <page id=\"page1\">\n";
  for (PlaceIndex p = 0; p < net.place_count(); ++p) {
    const auto id = escape_xml(net.places()[p]);
    out << "      <place id=\"" << id << "\">\n";
    out << "        <name><text>" << id << "</text></name>\n";
    if (const auto tokens = net.initial_marking()[p]; tokens > 0) {
      out << "        <initialMarking><text>" << tokens << "</text></initialMarking>\n";
    }
    out << "      </place>\n";
  }
  for (const auto& t : net.transitions()) {
    const auto id = escape_xml(t.id);
    if (t.label) {
      out << "      <transition id=\"" << id << "\">\n";
      out << "        <name><text>" << escape_xml(*t.label) << "</text></name>\n";
      out << "      </transition>\n";
    } else {
      out << "      <transition id=\"" << id << "\"/>\n";
    }
  }
  std::size_t arc_id = 0;
  for (const auto& a : net.arcs()) {
    const auto& place = net.places()[a.place];
    const auto& transition = net.transitions()[a.transition].id;
    const bool forward = a.direction == ArcDirection::PlaceToTransition;
    out << "      <arc id=\"a" << arc_id++ << "\" source=\""
        << escape_xml(forward ? place : transition) << "\" target=\""
        << escape_xml(forward ? transition : place) << "\"";
    if (a.weight != 1) {
      out << ">\n        <inscription><text>" << a.weight << "</text></inscription>\n"
          << "      </arc>\n";
    } else {
      out << "/>\n";
    }
  }
  out << "    </page>\n";
  out << "    <toolspecific tool=\"" << kToolName << "\" version=\"1\">\n";
  if (const auto s = net.source()) {
    out << "      <source idref=\"" << escape_xml(net.places()[*s]) << "\"/>\n";
  }
  if (const auto s = net.sink()) {
    out << "      <sink idref=\"" << escape_xml(net.places()[*s]) << "\"/>\n";
  }
  out << "    </toolspecific>\n";
  out << "  </net>\n";
  out << "</pnml>\n";
}

std::string to_pnml(const PetriNet& net) {
  std::ostringstream out;
  write_pnml(out, net);
  return out.str();
}

}  // namespace careflow
