#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "careflow/eventlog.hpp"
#include "careflow/petrinet.hpp"

namespace careflow {

struct DirectlyFollowsGraph {
  std::map<std::string, std::uint64_t> activities;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
  std::map<std::string, std::uint64_t> starts;
  std::map<std::string, std::uint64_t> ends;

  bool operator==(const DirectlyFollowsGraph&) const = default;
};

/// Counts activities, adjacent pairs, first and last events per trace.
/// Throws DataError for an empty log.
DirectlyFollowsGraph build_dfg(const EventLog& log);

/// Translates a DFG into a workflow net.
///
/// Edges below `edge_threshold` x (max edge count) are dropped, then only
/// activities on some start-to-end path of retained edges are kept. Each
/// kept activity `a` becomes a visible transition `t_a` between places
/// `in_a` and `out_a`; each retained edge (a, b) a hidden transition
/// `tau_edge_a->b` from `out_a` to `in_b`; a hidden `tau_start_a` moves
/// the source token to `in_a` and a hidden `tau_end_a` moves `out_a` to
/// the sink. Places are ordered source, (in_a, out_a) per activity by
/// name, sink. Throws DataError when filtering leaves no start-to-end path.
PetriNet dfg_to_petrinet(const DirectlyFollowsGraph& dfg, double edge_threshold = 0.0);

inline PetriNet discover(const EventLog& log, double edge_threshold = 0.0) {
  return dfg_to_petrinet(build_dfg(log), edge_threshold);
}

}  // namespace careflow
