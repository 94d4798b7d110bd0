#include <algorithm>
#include <set>

#include "careflow/petrinet.hpp"

namespace careflow {

namespace {

bool satisfies(const Marking& m, const std::vector<WeightedPlace>& goal) {
  return std::all_of(goal.begin(), goal.end(),
                     [&](const WeightedPlace& g) { return m[g.place] >= g.weight; });
}

// Hidden transitions that can contribute tokens to `goal`, sorted by id.
std::vector<TransitionIndex> backward_closure(
    const PetriNet& net, const std::vector<std::vector<TransitionIndex>>& producers,
    const std::vector<WeightedPlace>& goal) {
  std::vector<bool> relevant(net.transition_count(), false);
  std::vector<bool> seen(net.place_count(), false);
  std::vector<PlaceIndex> stack;
  for (const auto& g : goal) {
    if (!seen[g.place]) {
      seen[g.place] = true;
      stack.push_back(g.place);
    }
  }
  while (!stack.empty()) {
    const PlaceIndex p = stack.back();
    stack.pop_back();
    for (const TransitionIndex t : producers[p]) {
      if (relevant[t]) continue;
      relevant[t] = true;
      for (const auto& in : net.inputs(t)) {
        if (!seen[in.place]) {
          seen[in.place] = true;
          stack.push_back(in.place);
        }
      }
    }
  }
  std::vector<TransitionIndex> out;
  for (const TransitionIndex t : net.hidden_by_id()) {
    if (relevant[t]) out.push_back(t);
  }
  return out;
}

std::vector<WeightedPlace> input_goal(const PetriNet& net, TransitionIndex t) {
  const auto in = net.inputs(t);
  return {in.begin(), in.end()};
}

}  // namespace

Replayer::Replayer(const PetriNet& net, ReplayOptions options) : net_(&net), options_(options) {
  std::vector<std::vector<TransitionIndex>> producers(net.place_count());
  for (const TransitionIndex t : net.hidden_by_id()) {
    for (const auto& out : net.outputs(t)) producers[out.place].push_back(t);
  }
  relevant_hidden_.resize(net.transition_count());
  for (TransitionIndex t = 0; t < net.transition_count(); ++t) {
    if (!net.transitions()[t].hidden()) {
      relevant_hidden_[t] = backward_closure(net, producers, input_goal(net, t));
    }
  }
  if (const auto sink = net.sink()) {
    sink_relevant_hidden_ = backward_closure(net, producers, {WeightedPlace{*sink, 1}});
  }
}

std::optional<std::vector<TransitionIndex>> Replayer::search_hidden(
    const Marking& start, const std::vector<TransitionIndex>& candidates,
    const std::vector<WeightedPlace>& goal) const {
  if (candidates.empty() || options_.hidden_horizon == 0) return std::nullopt;

  struct Node {
    Marking marking;
    std::size_t parent;
    TransitionIndex via;
  };
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);
  std::vector<Node> nodes{Node{start, kRoot, 0}};
  std::set<Marking> visited{start};
  std::size_t level_begin = 0;

  for (std::size_t depth = 1; depth <= options_.hidden_horizon; ++depth) {
    const std::size_t level_end = nodes.size();
    for (std::size_t n = level_begin; n < level_end; ++n) {
      for (const TransitionIndex t : candidates) {
        if (!is_enabled(*net_, nodes[n].marking, t)) continue;
        Marking next = fire(*net_, nodes[n].marking, t);
        if (!visited.insert(next).second) continue;
        const bool done = satisfies(next, goal);
        nodes.push_back(Node{std::move(next), n, t});
        if (done) {
          std::vector<TransitionIndex> seq;
          for (std::size_t k = nodes.size() - 1; k != 0; k = nodes[k].parent) {
            seq.push_back(nodes[k].via);
          }
          std::reverse(seq.begin(), seq.end());
          return seq;
        }
      }
    }
    if (nodes.size() == level_end) break;
    level_begin = level_end;
  }
  return std::nullopt;
}

ReplayResult Replayer::replay(std::span<const EventInstance> events,
                              std::optional<Timestamp> cutoff) const {
  const PetriNet& net = *net_;
  ReplayResult result;
  Marking marking = net.initial_marking();
  result.place_entry_times.assign(net.place_count(), std::nullopt);
  result.place_entry_counts.assign(net.place_count(), 0);

  auto fire_and_record = [&](TransitionIndex t, Timestamp at) {
    marking = fire(net, marking, t);
    result.firing_timeline.push_back(Firing{t, at});
    for (const auto& out : net.outputs(t)) {
      result.place_entry_counts[out.place] += out.weight;
      result.place_entry_times[out.place] = at;
    }
  };

  std::optional<Timestamp> last_seen;
  for (const auto& event : events) {
    if (cutoff && event.timestamp > *cutoff) break;
    last_seen = event.timestamp;
    const auto visible = net.find_visible(event.event);
    if (!visible) {
      ++result.missing_tokens;
      continue;
    }
    const TransitionIndex t = *visible;
    if (!is_enabled(net, marking, t)) {
      if (auto seq = search_hidden(marking, relevant_hidden_[t], input_goal(net, t))) {
        for (const TransitionIndex h : *seq) fire_and_record(h, event.timestamp);
      } else {
        for (const auto& in : net.inputs(t)) {
          if (marking[in.place] < in.weight) {
            result.missing_tokens += in.weight - marking[in.place];
            marking[in.place] = in.weight;
          }
        }
      }
    }
    fire_and_record(t, event.timestamp);
  }

  if (!cutoff) {
    const auto sink = net.sink();
    if (sink && marking[*sink] == 0) {
      if (auto seq = search_hidden(marking, sink_relevant_hidden_, {WeightedPlace{*sink, 1}})) {
        for (const TransitionIndex h : *seq) fire_and_record(h, last_seen.value_or(0));
      }
    }
    result.remaining_tokens = marking.total() - (sink ? marking[*sink] : 0);
  }
  result.final_marking = std::move(marking);
  return result;
}

ReplayResult replay_trace(const PetriNet& net, const Trace& trace, std::optional<Timestamp> cutoff,
                          ReplayOptions options) {
  return Replayer(net, options).replay(trace.events, cutoff);
}

}  // namespace careflow
