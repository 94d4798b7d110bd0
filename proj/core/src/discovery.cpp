#include "careflow/discovery.hpp"

#include <algorithm>
#include <set>

namespace careflow {

DirectlyFollowsGraph build_dfg(const EventLog& log) {
  if (log.traces.empty()) throw DataError("cannot build a DFG from an empty log");
  DirectlyFollowsGraph dfg;
  for (const auto& trace : log.traces) {
    const auto& ev = trace.events;
    if (ev.empty()) continue;
    ++dfg.starts[ev.front().event];
    ++dfg.ends[ev.back().event];
    for (std::size_t i = 0; i < ev.size(); ++i) {
      ++dfg.activities[ev[i].event];
      if (i + 1 < ev.size()) ++dfg.edges[{ev[i].event, ev[i + 1].event}];
    }
  }
  return dfg;
}

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

std::set<std::string> reachable(const std::map<std::string, std::uint64_t>& seeds,
                                const Adjacency& adjacency) {
  std::set<std::string> seen;
  std::vector<std::string> stack;
  for (const auto& [name, count] : seeds) {
    if (seen.insert(name).second) stack.push_back(name);
  }
  while (!stack.empty()) {
    const auto node = std::move(stack.back());
    stack.pop_back();
    const auto it = adjacency.find(node);
    if (it == adjacency.end()) continue;
    for (const auto& next : it->second) {
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return seen;
}

}  // namespace

PetriNet dfg_to_petrinet(const DirectlyFollowsGraph& dfg, double edge_threshold) {
  if (!(edge_threshold >= 0.0 && edge_threshold <= 1.0)) {
    throw ConfigError("edge threshold must lie in [0, 1]");
  }
  std::uint64_t max_edge = 0;
  for (const auto& [edge, count] : dfg.edges) max_edge = std::max(max_edge, count);

  std::vector<std::pair<std::string, std::string>> kept_edges;
  Adjacency forward, backward;
  for (const auto& [edge, count] : dfg.edges) {
    if (static_cast<double>(count) < edge_threshold * static_cast<double>(max_edge)) continue;
    kept_edges.push_back(edge);
    forward[edge.first].push_back(edge.second);
    backward[edge.second].push_back(edge.first);
  }
  const auto from_start = reachable(dfg.starts, forward);
  const auto to_end = reachable(dfg.ends, backward);
  std::vector<std::string> activities;
  for (const auto& [name, count] : dfg.activities) {
    if (from_start.count(name) && to_end.count(name)) activities.push_back(name);
  }
  const std::set<std::string> kept(activities.begin(), activities.end());
  const bool any_start = std::any_of(dfg.starts.begin(), dfg.starts.end(),
                                     [&](const auto& s) { return kept.count(s.first) > 0; });
  if (activities.empty() || !any_start) {
    throw DataError("edge threshold disconnects every activity from the start and end");
  }

  PetriNet net;
  net.add_place("source");
  for (const auto& a : activities) {
    net.add_place("in_" + a);
    net.add_place("out_" + a);
  }
  net.add_place("sink");
  net.set_source("source");
  net.set_sink("sink");
  net.set_initial_tokens("source", 1);

  for (const auto& a : activities) {
    net.add_transition("t_" + a, a);
    net.add_arc("in_" + a, "t_" + a);
    net.add_arc("t_" + a, "out_" + a);
  }
  for (const auto& [a, count] : dfg.starts) {
    if (!kept.count(a)) continue;
    const auto id = "tau_start_" + a;
    net.add_transition(id);
    net.add_arc("source", id);
    net.add_arc(id, "in_" + a);
  }
  for (const auto& [a, b] : kept_edges) {
    if (!kept.count(a) || !kept.count(b)) continue;
    const auto id = "tau_edge_" + a + "->" + b;
    net.add_transition(id);
    net.add_arc("out_" + a, id);
    net.add_arc(id, "in_" + b);
  }
  for (const auto& [a, count] : dfg.ends) {
    if (!kept.count(a)) continue;
    const auto id = "tau_end_" + a;
    net.add_transition(id);
    net.add_arc("out_" + a, id);
    net.add_arc(id, "sink");
  }
  net.validate();
  return net;
}

}  // namespace careflow
