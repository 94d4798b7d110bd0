#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these call the library routine they are checking.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "careflow/dream.hpp"
#include "careflow/model.hpp"
#include "careflow/petrinet.hpp"

namespace careflow::testing {

// ---- Petri nets -----------------------------------------------------------

/// Random net with 2..max_places places and 1..max_transitions
/// transitions. Roughly 60% of transitions carry a unique label from
/// "a", "b", ...; the rest are hidden. Arc weights are 1 or 2. A source
/// and sink are set when a place without incoming (outgoing) arcs exists.
PetriNet random_net(Rng& rng, std::size_t max_places = 6, std::size_t max_transitions = 6);

/// Random events over the net's visible labels, occasionally an unknown
/// label "zz", with strictly increasing timestamps.
std::vector<EventInstance> random_events(Rng& rng, const PetriNet& net, std::size_t max_length = 8);

/// Step simulator for token replay. Hidden sequences are found by
/// iterative deepening over every hidden transition (no pruning beyond
/// enabledness), trying sequences in lexicographic id order.
ReplayResult brute_force_replay(const PetriNet& net, std::span<const EventInstance> events,
                                std::optional<Timestamp> cutoff, std::size_t horizon = 5);

// ---- DOT ------------------------------------------------------------------

struct DotGraph {
  bool directed = false;
  std::vector<std::string> nodes;  // declared by node statements
  std::map<std::string, std::map<std::string, std::string>> node_attributes;
  std::vector<std::pair<std::string, std::string>> edges;
};

/// Recursive-descent parser for the DOT language subset: graph/digraph,
/// node, edge, attribute and ID=ID statements, quoted and bare IDs.
/// Returns nullopt and fills `error` on a syntax error.
std::optional<DotGraph> parse_dot(const std::string& text, std::string* error = nullptr);

// ---- Statistics -------------------------------------------------------------

/// O(n^2) pair count; ties count one half.
double pairwise_auc(std::span<const double> scores, std::span<const int> labels);

/// Stratified bootstrap percentile interval for the AUC.
std::pair<double, double> bootstrap_auc_interval(std::span<const double> scores,
                                                 std::span<const int> labels,
                                                 std::size_t resamples, double level,
                                                 std::uint64_t seed);

/// Logistic regression by iteratively reweighted least squares. `x` is
/// row-major with `cols` columns; an intercept is prepended. Returns
/// [intercept, coefficients...].
std::vector<double> logistic_irls(std::span<const double> x, std::size_t cols,
                                  std::span<const int> y, int iterations = 50);

std::vector<double> logistic_predict(std::span<const double> x, std::size_t cols,
                                     std::span<const double> beta);

// ---- Shapley ----------------------------------------------------------------

/// Average marginal contribution over all k! orderings.
std::vector<double> permutation_shapley(std::size_t players,
                                        const std::function<double(std::uint32_t)>& value);

// ---- Decay ------------------------------------------------------------------

/// Decay rates from the brute-force replay: reciprocal mean gap between
/// successive entries of a place within a trace, or the reciprocal mean
/// trace duration (at least 1 ms) when no gap exists.
std::vector<double> gap_average_delta(const PetriNet& net, const EventLog& log);

// ---- Network ----------------------------------------------------------------

/// Inference-mode forward pass written without explicit index loops.
double straight_line_forward(const NetworkWeights& w, std::span<const double> tss,
                             std::span<const double> demo);

/// Central finite-difference gradient of batch_loss over `rows`.
NetworkWeights finite_difference_gradient(const NetworkWeights& w, const PredictionDataset& data,
                                          std::span<const std::size_t> rows, double h);

/// max over parameters of |a - n| / max(|a|, |n|, floor).
double max_relative_error(const NetworkWeights& analytic, const NetworkWeights& numeric,
                          double floor);

}  // namespace careflow::testing
