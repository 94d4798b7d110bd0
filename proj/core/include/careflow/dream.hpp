#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "careflow/dataset.hpp"
#include "careflow/eventlog.hpp"
#include "careflow/petrinet.hpp"

namespace careflow {

/// Per-place linear decay parameters, in the net's place order.
struct DecayParams {
  std::vector<std::string> place_order;
  std::vector<double> beta;         // initial decay value, > 0
  std::vector<double> delta;        // decay per millisecond, >= 0
  std::vector<double> count_scale;  // entry-count normalizer, >= 1

  std::size_t size() const { return place_order.size(); }
  /// Throws DataError if the parameters do not describe `net`'s places.
  void check_compatible(const PetriNet& net) const;

  bool operator==(const DecayParams&) const = default;
};

/// Fits decay parameters from whole-trace replays of the training log.
///
/// delta_p is the reciprocal of the mean gap between consecutive token
/// entries into p within a trace, pooled over all traces. A place with no
/// such gap falls back to 1 / (mean trace duration). beta_p = 1 and
/// count_scale_p is the largest number of tokens p received in one replay
/// (at least 1). Throws DataError for an empty log.
DecayParams estimate_decay_params(const PetriNet& net, const EventLog& train_log);

/// Decay values F, scaled entry counts C and marking M at one instant.
struct TimedStateSample {
  std::vector<double> f;
  std::vector<double> c;
  std::vector<double> m;
  Timestamp at = 0;

  std::size_t dimension() const { return f.size() + c.size() + m.size(); }
  /// F followed by C followed by M.
  std::vector<double> concatenated() const;
};

/// Replays events with timestamp <= at and reads off the state:
/// f_p = max(beta_p - delta_p * (at - last entry), 0) (0 if never entered),
/// c_p = entries / count_scale_p, m_p = tokens in p.
/// Throws DataError when `at` precedes the trace's first event.
TimedStateSample timed_state_sample(const Replayer& replayer, const DecayParams& params,
                                    const Trace& trace, Timestamp at);
TimedStateSample timed_state_sample(const PetriNet& net, const DecayParams& params,
                                    const Trace& trace, Timestamp at);

/// One row per trace, sampled at admit_timestamp + cutoff_hours.
PredictionDataset build_dataset(const PetriNet& net, const DecayParams& params,
                                const EventLog& log, double cutoff_hours = 24.0);

/// Sidecar JSON: {"places": [...], "beta": [...], "delta": [...],
/// "count_scale": [...], "cutoff_hours": h}.
void write_decay_params_json(std::ostream& out, const DecayParams& params, double cutoff_hours);
DecayParams read_decay_params_json(std::istream& in);

}  // namespace careflow
