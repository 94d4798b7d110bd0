#pragma once

#include <iosfwd>
#include <string>

#include "careflow/petrinet.hpp"

namespace careflow {

/// Reads the PNML place/transition subset documented in docs/formats.md.
///
/// Places, transitions and arcs may sit directly under <net> or inside
/// (nested) <page> elements. A transition without a <name> is hidden, as
/// is one tagged with ProM's `$invisible$` activity marker. Source and sink
/// come from the careflow <toolspecific> block; without it they are
/// inferred when exactly one place lacks incoming (resp. outgoing) arcs.
/// Throws DataError on malformed XML or dangling references.
PetriNet parse_pnml(std::istream& in);

void write_pnml(std::ostream& out, const PetriNet& net);
std::string to_pnml(const PetriNet& net);

/// Graphviz DOT rendering: places as circles (source yellow, sink green),
/// visible transitions as labelled boxes, hidden transitions as filled
/// black boxes with an empty label. When a marking is given, each marked
/// place shows its tokens as dots (or a count above five).
std::string to_dot(const PetriNet& net, const Marking* marking = nullptr);

}  // namespace careflow
