#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "careflow/common.hpp"
#include "careflow/eventlog.hpp"

namespace careflow {

using PlaceIndex = std::size_t;
using TransitionIndex = std::size_t;

/// Token counts indexed by place position in the owning net.
class Marking {
 public:
  Marking() = default;
  explicit Marking(std::size_t place_count) : tokens_(place_count, 0) {}
  explicit Marking(std::vector<std::uint32_t> tokens) : tokens_(std::move(tokens)) {}

  std::uint32_t operator[](PlaceIndex p) const { return tokens_.at(p); }
  std::uint32_t& operator[](PlaceIndex p) { return tokens_.at(p); }

  std::size_t size() const { return tokens_.size(); }
  std::uint64_t total() const;
  std::span<const std::uint32_t> tokens() const { return tokens_; }

  auto operator<=>(const Marking&) const = default;

 private:
  std::vector<std::uint32_t> tokens_;
};

struct Transition {
  std::string id;
  std::optional<std::string> label;  // absent = hidden

  bool hidden() const { return !label.has_value(); }
  bool operator==(const Transition&) const = default;
};

enum class ArcDirection { PlaceToTransition, TransitionToPlace };

struct Arc {
  ArcDirection direction = ArcDirection::PlaceToTransition;
  PlaceIndex place = 0;
  TransitionIndex transition = 0;
  std::uint32_t weight = 1;

  bool operator==(const Arc&) const = default;
};

struct WeightedPlace {
  PlaceIndex place;
  std::uint32_t weight;
};

/// Place/transition net with optional visible labels on transitions.
///
/// Built incrementally; arcs may only join a place and a transition, and
/// visible labels are unique. Places and transitions keep insertion order,
/// which is the canonical order for markings and feature vectors.
class PetriNet {
 public:
  PlaceIndex add_place(std::string id);
  TransitionIndex add_transition(std::string id, std::optional<std::string> label = std::nullopt);

  /// Adds an arc between a place and a transition in either direction,
  /// resolved by id. Throws std::invalid_argument for unknown ids,
  /// same-kind endpoints, zero weight, or a duplicate arc.
  void add_arc(std::string_view source, std::string_view target, std::uint32_t weight = 1);

  void set_initial_tokens(std::string_view place, std::uint32_t count);
  void set_source(std::string_view place);
  void set_sink(std::string_view place);

  const std::vector<std::string>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Marking& initial_marking() const { return initial_marking_; }
  std::optional<PlaceIndex> source() const { return source_; }
  std::optional<PlaceIndex> sink() const { return sink_; }

  std::size_t place_count() const { return places_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }
  std::size_t visible_transition_count() const;

  std::optional<PlaceIndex> find_place(std::string_view id) const;
  std::optional<TransitionIndex> find_transition(std::string_view id) const;
  std::optional<TransitionIndex> find_visible(std::string_view label) const;

  std::span<const WeightedPlace> inputs(TransitionIndex t) const { return inputs_.at(t); }
  std::span<const WeightedPlace> outputs(TransitionIndex t) const { return outputs_.at(t); }

  /// Hidden transitions sorted by id.
  const std::vector<TransitionIndex>& hidden_by_id() const { return hidden_by_id_; }

  /// Checks source/sink constraints; throws std::invalid_argument.
  void validate() const;

  bool operator==(const PetriNet& other) const;

 private:
  std::vector<std::string> places_;
  std::vector<Transition> transitions_;
  std::vector<Arc> arcs_;
  Marking initial_marking_;
  std::optional<PlaceIndex> source_;
  std::optional<PlaceIndex> sink_;

  std::map<std::string, PlaceIndex, std::less<>> place_index_;
  std::map<std::string, TransitionIndex, std::less<>> transition_index_;
  std::map<std::string, TransitionIndex, std::less<>> label_index_;
  std::vector<std::vector<WeightedPlace>> inputs_;
  std::vector<std::vector<WeightedPlace>> outputs_;
  std::vector<TransitionIndex> hidden_by_id_;
};

bool is_enabled(const PetriNet& net, const Marking& marking, TransitionIndex t);
/// Throws std::invalid_argument for an unknown transition id.
bool is_enabled(const PetriNet& net, const Marking& marking, std::string_view transition_id);

/// Consume input weights, produce output weights. Throws std::logic_error
/// if the transition is not enabled.
Marking fire(const PetriNet& net, const Marking& marking, TransitionIndex t);
Marking fire(const PetriNet& net, const Marking& marking, std::string_view transition_id);

struct Firing {
  TransitionIndex transition;
  Timestamp at;

  bool operator==(const Firing&) const = default;
};

struct ReplayResult {
  Marking final_marking;
  std::vector<Firing> firing_timeline;
  /// Last time a token was produced into each place; nullopt if never.
  std::vector<std::optional<Timestamp>> place_entry_times;
  /// Tokens produced into each place by firings during replay.
  std::vector<std::uint64_t> place_entry_counts;
  std::uint64_t missing_tokens = 0;
  /// Tokens outside the sink after completion; only set when replaying
  /// the whole trace (no cutoff).
  std::optional<std::uint64_t> remaining_tokens;

  bool operator==(const ReplayResult&) const = default;
};

struct ReplayOptions {
  /// Longest hidden-transition sequence tried before forcing a firing.
  std::size_t hidden_horizon = 5;
};

/// Token-based replay with hidden-transition search and forced firing.
///
/// For each event with timestamp <= cutoff, in order:
///   1. no visible transition carries the label: skip, missing += 1;
///   2. the transition is enabled: fire it;
///   3. otherwise breadth-first search for the shortest sequence of at most
///      `hidden_horizon` hidden firings that enables it, ties broken by
///      transition id; fire the sequence, then the event;
///   4. otherwise add the deficit tokens to its input places, count them
///      as missing, and fire.
/// Without a cutoff the replay finishes by searching for a hidden sequence
/// that marks the sink (if the net has one and it is empty), then reports
/// the tokens left outside the sink. Initial-marking tokens are not
/// counted as entries. All firings are stamped with the triggering event's
/// timestamp; completion firings with the last event's timestamp.
///
/// The search only expands hidden transitions that can feed the target's
/// input places (backward closure). Every shortest enabling sequence lies
/// inside that closure, so the result equals an unrestricted search.
class Replayer {
 public:
  explicit Replayer(const PetriNet& net, ReplayOptions options = {});

  ReplayResult replay(std::span<const EventInstance> events,
                      std::optional<Timestamp> cutoff = std::nullopt) const;

  const PetriNet& net() const { return *net_; }

 private:
  std::optional<std::vector<TransitionIndex>> search_hidden(
      const Marking& start, const std::vector<TransitionIndex>& candidates,
      const std::vector<WeightedPlace>& goal) const;

  const PetriNet* net_;
  ReplayOptions options_;
  // Candidate hidden transitions (sorted by id) per visible transition, and
  // for reaching the sink.
  std::vector<std::vector<TransitionIndex>> relevant_hidden_;
  std::vector<TransitionIndex> sink_relevant_hidden_;
};

ReplayResult replay_trace(const PetriNet& net, const Trace& trace,
                          std::optional<Timestamp> cutoff = std::nullopt,
                          ReplayOptions options = {});

}  // namespace careflow
