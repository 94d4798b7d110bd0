#include "careflow/petrinet.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace careflow {

std::uint64_t Marking::total() const {
  return std::accumulate(tokens_.begin(), tokens_.end(), std::uint64_t{0});
}

PlaceIndex PetriNet::add_place(std::string id) {
  if (id.empty()) throw std::invalid_argument("place id must not be empty");
  if (place_index_.count(id) || transition_index_.count(id)) {
    throw std::invalid_argument("duplicate node id '" + id + "'");
  }
  const PlaceIndex index = places_.size();
  place_index_.emplace(id, index);
  places_.push_back(std::move(id));
  std::vector<std::uint32_t> tokens(initial_marking_.tokens().begin(),
                                    initial_marking_.tokens().end());
  tokens.push_back(0);
  initial_marking_ = Marking(std::move(tokens));
  return index;
}

TransitionIndex PetriNet::add_transition(std::string id, std::optional<std::string> label) {
  if (id.empty()) throw std::invalid_argument("transition id must not be empty");
  if (place_index_.count(id) || transition_index_.count(id)) {
    throw std::invalid_argument("duplicate node id '" + id + "'");
  }
  if (label) {
    if (label->empty()) throw std::invalid_argument("visible label must not be empty");
    if (label_index_.count(*label)) {
      throw std::invalid_argument("duplicate visible label '" + *label + "'");
    }
  }
  const TransitionIndex index = transitions_.size();
  transition_index_.emplace(id, index);
  if (label) label_index_.emplace(*label, index);
  transitions_.push_back(Transition{std::move(id), std::move(label)});
  inputs_.emplace_back();
  outputs_.emplace_back();
  if (transitions_.back().hidden()) {
    const auto pos = std::lower_bound(
        hidden_by_id_.begin(), hidden_by_id_.end(), transitions_.back().id,
        [&](TransitionIndex t, const std::string& key) { return transitions_[t].id < key; });
    hidden_by_id_.insert(pos, index);
  }
  return index;
}

void PetriNet::add_arc(std::string_view source, std::string_view target, std::uint32_t weight) {
  if (weight == 0) throw std::invalid_argument("arc weight must be positive");
  Arc arc;
  arc.weight = weight;
  if (const auto p = find_place(source)) {
    const auto t = find_transition(target);
    if (!t) {
      throw std::invalid_argument("arc " + std::string(source) + "->" + std::string(target) +
                                  ": target is not a transition");
    }
    arc.direction = ArcDirection::PlaceToTransition;
    arc.place = *p;
    arc.transition = *t;
  } else if (const auto t = find_transition(source)) {
    const auto q = find_place(target);
    if (!q) {
      throw std::invalid_argument("arc " + std::string(source) + "->" + std::string(target) +
                                  ": target is not a place");
    }
    arc.direction = ArcDirection::TransitionToPlace;
    arc.place = *q;
    arc.transition = *t;
  } else {
    throw std::invalid_argument("arc source '" + std::string(source) + "' does not exist");
  }
  for (const auto& existing : arcs_) {
    if (existing.direction == arc.direction && existing.place == arc.place &&
        existing.transition == arc.transition) {
      throw std::invalid_argument("duplicate arc " + std::string(source) + "->" +
                                  std::string(target));
    }
  }
  auto& bucket = arc.direction == ArcDirection::PlaceToTransition ? inputs_[arc.transition]
                                                                   : outputs_[arc.transition];
  bucket.push_back(WeightedPlace{arc.place, weight});
  arcs_.push_back(arc);
}

void PetriNet::set_initial_tokens(std::string_view place, std::uint32_t count) {
  const auto p = find_place(place);
  if (!p) throw std::invalid_argument("unknown place '" + std::string(place) + "'");
  initial_marking_[*p] = count;
}

void PetriNet::set_source(std::string_view place) {
  const auto p = find_place(place);
  if (!p) throw std::invalid_argument("unknown source place '" + std::string(place) + "'");
  source_ = *p;
}

void PetriNet::set_sink(std::string_view place) {
  const auto p = find_place(place);
  if (!p) throw std::invalid_argument("unknown sink place '" + std::string(place) + "'");
  sink_ = *p;
}

std::size_t PetriNet::visible_transition_count() const {
  return label_index_.size();
}

std::optional<PlaceIndex> PetriNet::find_place(std::string_view id) const {
  const auto it = place_index_.find(id);
  if (it == place_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TransitionIndex> PetriNet::find_transition(std::string_view id) const {
  const auto it = transition_index_.find(id);
  if (it == transition_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<TransitionIndex> PetriNet::find_visible(std::string_view label) const {
  const auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

void PetriNet::validate() const {
  for (const auto& arc : arcs_) {
    if (source_ && arc.place == *source_ && arc.direction == ArcDirection::TransitionToPlace) {
      throw std::invalid_argument("source place '" + places_[*source_] + "' has an incoming arc");
    }
    if (sink_ && arc.place == *sink_ && arc.direction == ArcDirection::PlaceToTransition) {
      throw std::invalid_argument("sink place '" + places_[*sink_] + "' has an outgoing arc");
    }
  }
  if (source_ && sink_ && *source_ == *sink_) {
    throw std::invalid_argument("source and sink must differ");
  }
}

bool PetriNet::operator==(const PetriNet& other) const {
  if (places_ != other.places_ || transitions_ != other.transitions_ ||
      initial_marking_ != other.initial_marking_ || source_ != other.source_ ||
      sink_ != other.sink_ || arcs_.size() != other.arcs_.size()) {
    return false;
  }
  auto key = [](const Arc& a) {
    return std::tuple(a.direction, a.place, a.transition, a.weight);
  };
  std::vector<Arc> lhs = arcs_, rhs = other.arcs_;
  auto less = [&](const Arc& a, const Arc& b) { return key(a) < key(b); };
  std::sort(lhs.begin(), lhs.end(), less);
  std::sort(rhs.begin(), rhs.end(), less);
  return lhs == rhs;
}

bool is_enabled(const PetriNet& net, const Marking& marking, TransitionIndex t) {
  for (const auto& in : net.inputs(t)) {
    if (marking[in.place] < in.weight) return false;
  }
  return true;
}

bool is_enabled(const PetriNet& net, const Marking& marking, std::string_view transition_id) {
  const auto t = net.find_transition(transition_id);
  if (!t) throw std::invalid_argument("unknown transition '" + std::string(transition_id) + "'");
  return is_enabled(net, marking, *t);
}

Marking fire(const PetriNet& net, const Marking& marking, TransitionIndex t) {
  if (!is_enabled(net, marking, t)) {
    throw std::logic_error("transition '" + net.transitions().at(t).id + "' is not enabled");
  }
  Marking next = marking;
  for (const auto& in : net.inputs(t)) next[in.place] -= in.weight;
  for (const auto& out : net.outputs(t)) next[out.place] += out.weight;
  return next;
}

Marking fire(const PetriNet& net, const Marking& marking, std::string_view transition_id) {
  const auto t = net.find_transition(transition_id);
  if (!t) throw std::invalid_argument("unknown transition '" + std::string(transition_id) + "'");
  return fire(net, marking, *t);
}

}  // namespace careflow
