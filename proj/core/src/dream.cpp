#include "careflow/dream.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

namespace careflow {

void DecayParams::check_compatible(const PetriNet& net) const {
  if (place_order != net.places()) {
    throw DataError("decay parameters were fitted on a different place set");
  }
  const auto n = place_order.size();
  if (beta.size() != n || delta.size() != n || count_scale.size() != n) {
    throw DataError("decay parameter vectors have inconsistent lengths");
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (!(beta[p] > 0.0) || !(delta[p] >= 0.0) || !(count_scale[p] >= 1.0) ||
        !std::isfinite(beta[p]) || !std::isfinite(delta[p]) || !std::isfinite(count_scale[p])) {
      throw DataError("invalid decay parameters for place " + place_order[p]);
    }
  }
}

DecayParams estimate_decay_params(const PetriNet& net, const EventLog& train_log) {
  if (train_log.traces.empty()) throw DataError("cannot fit decay parameters on an empty log");
  const std::size_t places = net.place_count();
  std::vector<double> gap_sum(places, 0.0);
  std::vector<std::uint64_t> gap_count(places, 0);
  std::vector<std::uint64_t> max_entries(places, 0);
  double duration_sum = 0.0;

  const Replayer replayer(net);
  std::vector<std::optional<Timestamp>> last_entry(places);
  for (const auto& trace : train_log.traces) {
    const auto result = replayer.replay(trace.events);
    std::fill(last_entry.begin(), last_entry.end(), std::nullopt);
    for (const auto& firing : result.firing_timeline) {
      for (const auto& out : net.outputs(firing.transition)) {
        if (const auto prev = last_entry[out.place]) {
          gap_sum[out.place] += static_cast<double>(firing.at - *prev);
          ++gap_count[out.place];
        }
        last_entry[out.place] = firing.at;
      }
    }
    for (std::size_t p = 0; p < places; ++p) {
      max_entries[p] = std::max(max_entries[p], result.place_entry_counts[p]);
    }
    if (!trace.events.empty()) {
      duration_sum +=
          static_cast<double>(trace.events.back().timestamp - trace.events.front().timestamp);
    }
  }

  const double mean_duration =
      std::max(duration_sum / static_cast<double>(train_log.traces.size()), 1.0);
  DecayParams params;
  params.place_order = net.places();
  params.beta.assign(places, 1.0);
  params.delta.resize(places);
  params.count_scale.resize(places);
  for (std::size_t p = 0; p < places; ++p) {
    const double mean_gap =
        gap_count[p] > 0 ? gap_sum[p] / static_cast<double>(gap_count[p]) : 0.0;
    params.delta[p] = mean_gap > 0.0 ? 1.0 / mean_gap : 1.0 / mean_duration;
    params.count_scale[p] = static_cast<double>(std::max<std::uint64_t>(max_entries[p], 1));
  }
  return params;
}

std::vector<double> TimedStateSample::concatenated() const {
  std::vector<double> out;
  out.reserve(dimension());
  out.insert(out.end(), f.begin(), f.end());
  out.insert(out.end(), c.begin(), c.end());
  out.insert(out.end(), m.begin(), m.end());
  return out;
}

TimedStateSample timed_state_sample(const Replayer& replayer, const DecayParams& params,
                                    const Trace& trace, Timestamp at) {
  if (trace.events.empty() || at < trace.events.front().timestamp) {
    throw DataError("case " + trace.case_id + ": sample time precedes the first event");
  }
  const auto result = replayer.replay(trace.events, at);
  const std::size_t places = params.size();
  TimedStateSample sample;
  sample.at = at;
  sample.f.resize(places);
  sample.c.resize(places);
  sample.m.resize(places);
  for (std::size_t p = 0; p < places; ++p) {
    if (const auto entered = result.place_entry_times[p]) {
      const double elapsed = static_cast<double>(at - *entered);
      sample.f[p] = std::max(params.beta[p] - params.delta[p] * elapsed, 0.0);
    }
    sample.c[p] = static_cast<double>(result.place_entry_counts[p]) / params.count_scale[p];
    sample.m[p] = static_cast<double>(result.final_marking[p]);
  }
  return sample;
}

TimedStateSample timed_state_sample(const PetriNet& net, const DecayParams& params,
                                    const Trace& trace, Timestamp at) {
  params.check_compatible(net);
  return timed_state_sample(Replayer(net), params, trace, at);
}

PredictionDataset build_dataset(const PetriNet& net, const DecayParams& params,
                                const EventLog& log, double cutoff_hours) {
  params.check_compatible(net);
  const Replayer replayer(net);
  const Timestamp offset = hours_to_ms(cutoff_hours);
  PredictionDataset data;
  data.samples = Matrix(0, 3 * net.place_count());
  data.demographics = Matrix(0, kDemographicWidth);
  for (const auto& trace : log.traces) {
    const auto sample =
        timed_state_sample(replayer, params, trace, trace.admit_timestamp + offset);
    data.case_ids.push_back(trace.case_id);
    data.samples.append_row(sample.concatenated());
    data.demographics.append_row(encode_demographics(trace.demographics));
    data.labels.push_back(label_of(trace.outcome));
  }
  return data;
}

void write_decay_params_json(std::ostream& out, const DecayParams& params, double cutoff_hours) {
  nlohmann::json j;
  j["places"] = params.place_order;
  j["beta"] = params.beta;
  j["delta"] = params.delta;
  j["count_scale"] = params.count_scale;
  j["cutoff_hours"] = cutoff_hours;
  out << j.dump(2) << '\n';
}

DecayParams read_decay_params_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    DecayParams params;
    params.place_order = j.at("places").get<std::vector<std::string>>();
    params.beta = j.at("beta").get<std::vector<double>>();
    params.delta = j.at("delta").get<std::vector<double>>();
    params.count_scale = j.at("count_scale").get<std::vector<double>>();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("decay parameter file: ") + e.what());
  }
}

}  // namespace careflow
