#include <sstream>

#include "careflow/pnml.hpp"

namespace careflow {

namespace {

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (const char ch : text) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string token_text(std::uint32_t tokens) {
  if (tokens == 0) return "";
  if (tokens > 5) return std::to_string(tokens);
  std::string dots;
  for (std::uint32_t i = 0; i < tokens; ++i) dots += "●";
  return dots;
}

}  // namespace

std::string to_dot(const PetriNet& net, const Marking* marking) {
  std::ostringstream out;
  out << "digraph petrinet {\n";
  out << "  rankdir=LR;\n";
  for (PlaceIndex p = 0; p < net.place_count(); ++p) {
    out << "  " << quote("p:" + net.places()[p]) << " [shape=circle";
    if (net.source() == p) {
      out << ", style=filled, fillcolor=yellow";
    } else if (net.sink() == p) {
      out << ", style=filled, fillcolor=green";
    }
    const std::uint32_t tokens = marking ? (*marking)[p] : 0;
    out << ", label=" << quote(token_text(tokens));
    out << ", xlabel=" << quote(net.places()[p]) << "];\n";
  }
  for (const auto& t : net.transitions()) {
    out << "  " << quote("t:" + t.id);
    if (t.label) {
      out << " [shape=box, label=" << quote(*t.label) << "];\n";
    } else {
      out << " [shape=box, style=filled, fillcolor=black, label=\"\", width=0.2];\n";
    }
  }
  for (const auto& a : net.arcs()) {
    const auto place = quote("p:" + net.places()[a.place]);
    const auto transition = quote("t:" + net.transitions()[a.transition].id);
    const bool forward = a.direction == ArcDirection::PlaceToTransition;
    out << "  " << (forward ? place : transition) << " -> " << (forward ? transition : place);
    if (a.weight != 1) out << " [label=" << quote(std::to_string(a.weight)) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace careflow
