#include "careflow/eventlog.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "careflow/vocabulary.hpp"

namespace careflow {

namespace {

constexpr std::string_view kEventsHeader = "case_id,event,timestamp";
constexpr std::string_view kDemographicsHeader =
    "case_id,age,insurance,admit_timestamp,prior_admissions,outcome";

struct RowError {
  std::string_view file;
  std::size_t line;

  [[noreturn]] void operator()(const std::string& what) const {
    throw DataError(std::string(file) + " line " + std::to_string(line) + ": " + what);
  }
};

// Calls `row(fields, line_number)` for every non-empty record after the header.
template <typename RowFn>
void read_csv(std::istream& in, std::string_view file, std::string_view header, RowFn&& row) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(file) + ": empty input");
  if (chomp(line) != header) {
    throw DataError(std::string(file) + " line 1: expected header '" + std::string(header) + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = chomp(line);
    if (text.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(text);
    } catch (const DataError& e) {
      RowError{file, line_no}(e.what());
    }
    row(fields, RowError{file, line_no});
  }
}

using EventRows = std::map<std::string, std::vector<EventInstance>>;

EventRows read_event_rows(std::istream& in) {
  EventRows rows;
  read_csv(in, "events", kEventsHeader, [&](const std::vector<std::string>& f, RowError fail) {
    if (f.size() != 3) fail("expected 3 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) fail("empty case_id");
    if (f[1].empty()) fail("empty event name");
    Timestamp ts = 0;
    try {
      ts = parse_iso8601(f[2]);
    } catch (const DataError& e) {
      fail(e.what());
    }
    rows[f[0]].push_back(EventInstance{f[1], ts});
  });
  for (auto& [case_id, events] : rows) {
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i].timestamp == events[i - 1].timestamp) {
        throw DataError("duplicate timestamp " + format_iso8601(events[i].timestamp) +
                        " in case " + case_id);
      }
    }
  }
  return rows;
}

void check_trace(const Trace& trace) {
  const auto& id = trace.case_id;
  if (id.empty()) throw DataError("trace with empty case_id");
  if (trace.events.empty()) throw DataError("case " + id + ": no events");
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    if (trace.events[i].event.empty()) throw DataError("case " + id + ": empty event name");
    if (i > 0 && trace.events[i].timestamp <= trace.events[i - 1].timestamp) {
      throw DataError("case " + id + ": timestamps not strictly increasing");
    }
  }
  const auto exits = std::count_if(trace.events.begin(), trace.events.end(),
                                   [](const auto& e) { return is_exit_event(e.event); });
  if (exits != 1) {
    throw DataError("case " + id + ": expected exactly one exit event, found " +
                    std::to_string(exits));
  }
  const auto& last = trace.events.back().event;
  if (!is_exit_event(last)) throw DataError("case " + id + ": exit event is not last");
  const auto expected = last == kDeathEvent ? Outcome::Death : Outcome::Discharge;
  if (trace.outcome != expected) {
    throw DataError("case " + id + ": outcome label disagrees with exit event " + last);
  }
  if (trace.prior_admissions < 0) throw DataError("case " + id + ": negative prior_admissions");
}

std::vector<std::string> observed_vocabulary(const std::vector<Trace>& traces) {
  std::set<std::string> names;
  for (const auto& t : traces) {
    for (const auto& e : t.events) names.insert(e.event);
  }
  return {names.begin(), names.end()};
}

}  // namespace

std::string_view to_string(Insurance insurance) {
  switch (insurance) {
    case Insurance::Medicaid: return "Medicaid";
    case Insurance::Medicare: return "Medicare";
    case Insurance::Private: return "Private";
    case Insurance::SelfPay: return "SelfPay";
    case Insurance::Government: return "Government";
  }
  return "";
}

std::optional<Insurance> parse_insurance(std::string_view text) {
  for (const auto category : kInsuranceCategories) {
    if (to_string(category) == text) return category;
  }
  return std::nullopt;
}

std::optional<Timestamp> Trace::death_timestamp() const {
  for (const auto& e : events) {
    if (e.event == kDeathEvent) return e.timestamp;
  }
  return std::nullopt;
}

EventLog parse_event_log(std::istream& events, std::istream& demographics,
                         std::optional<std::span<const std::string_view>> declared_vocabulary) {
  EventRows rows = read_event_rows(events);

  EventLog log;
  std::set<std::string> seen;
  read_csv(demographics, "demographics", kDemographicsHeader,
           [&](const std::vector<std::string>& f, RowError fail) {
             if (f.size() != 6) fail("expected 6 fields, got " + std::to_string(f.size()));
             const auto& case_id = f[0];
             if (case_id.empty()) fail("empty case_id");
             if (!seen.insert(case_id).second) fail("duplicate case_id " + case_id);
             std::int64_t age = 0, prior = 0, outcome = 0;
             if (!parse_int64(f[1], age) || age < 0 || age > 150) fail("invalid age '" + f[1] + "'");
             const auto insurance = parse_insurance(f[2]);
             if (!insurance) fail("unknown insurance category '" + f[2] + "'");
             Timestamp admit = 0;
             try {
               admit = parse_iso8601(f[3]);
             } catch (const DataError& e) {
               fail(e.what());
             }
             if (!parse_int64(f[4], prior) || prior < 0) {
               fail("invalid prior_admissions '" + f[4] + "'");
             }
             if (!parse_int64(f[5], outcome) || (outcome != 0 && outcome != 1)) {
               fail("invalid outcome '" + f[5] + "' (expected 0 or 1)");
             }
             auto it = rows.find(case_id);
             if (it == rows.end()) fail("no events for case " + case_id);
             Trace trace;
             trace.case_id = case_id;
             trace.events = std::move(it->second);
             rows.erase(it);
             trace.demographics = {static_cast<int>(age), *insurance};
             trace.outcome = outcome == 1 ? Outcome::Death : Outcome::Discharge;
             trace.admit_timestamp = admit;
             trace.prior_admissions = static_cast<int>(prior);
             log.traces.push_back(std::move(trace));
           });
  if (!rows.empty()) throw DataError("missing demographics for case " + rows.begin()->first);

  std::sort(log.traces.begin(), log.traces.end(),
            [](const Trace& a, const Trace& b) { return a.case_id < b.case_id; });
  if (declared_vocabulary) {
    std::set<std::string> names(declared_vocabulary->begin(), declared_vocabulary->end());
    log.vocabulary.assign(names.begin(), names.end());
  } else {
    log.vocabulary = observed_vocabulary(log.traces);
  }
  validate(log);
  return log;
}

EventLog parse_events_only(std::istream& events) {
  EventRows rows = read_event_rows(events);
  EventLog log;
  for (auto& [case_id, instances] : rows) {
    Trace trace;
    trace.case_id = case_id;
    trace.events = std::move(instances);
    trace.admit_timestamp = trace.events.front().timestamp;
    trace.outcome = trace.events.back().event == kDeathEvent ? Outcome::Death : Outcome::Discharge;
    log.traces.push_back(std::move(trace));
  }
  log.vocabulary = observed_vocabulary(log.traces);
  validate(log);
  return log;
}

void validate(const EventLog& log) {
  if (!std::is_sorted(log.vocabulary.begin(), log.vocabulary.end()) ||
      std::adjacent_find(log.vocabulary.begin(), log.vocabulary.end()) != log.vocabulary.end()) {
    throw DataError("vocabulary must be sorted and unique");
  }
  std::set<std::string_view> ids;
  for (const auto& trace : log.traces) {
    check_trace(trace);
    if (!ids.insert(trace.case_id).second) {
      throw DataError("duplicate case_id " + trace.case_id);
    }
    for (const auto& e : trace.events) {
      if (!std::binary_search(log.vocabulary.begin(), log.vocabulary.end(), e.event)) {
        throw DataError("case " + trace.case_id + ": event '" + e.event +
                        "' is not in the vocabulary");
      }
    }
  }
}

void write_events_csv(std::ostream& out, const EventLog& log) {
  out << kEventsHeader << '\n';
  for (const auto& trace : log.traces) {
    for (const auto& e : trace.events) {
      out << csv_escape(trace.case_id) << ',' << csv_escape(e.event) << ','
          << format_iso8601(e.timestamp) << '\n';
    }
  }
}

void write_demographics_csv(std::ostream& out, const EventLog& log) {
  out << kDemographicsHeader << '\n';
  for (const auto& t : log.traces) {
    out << csv_escape(t.case_id) << ',' << t.demographics.age << ','
        << to_string(t.demographics.insurance) << ',' << format_iso8601(t.admit_timestamp) << ','
        << t.prior_admissions << ',' << label_of(t.outcome) << '\n';
  }
}

Timestamp hours_to_ms(double hours) {
  return static_cast<Timestamp>(std::llround(hours * static_cast<double>(kMillisPerHour)));
}

EventLog filter_cohort(const EventLog& log, double cutoff_hours) {
  const Timestamp cutoff = hours_to_ms(cutoff_hours);
  EventLog out;
  out.vocabulary = log.vocabulary;
  for (const auto& trace : log.traces) {
    if (trace.demographics.age < 18) continue;
    if (trace.prior_admissions == 0) continue;
    if (const auto death = trace.death_timestamp(); death && *death < trace.admit_timestamp + cutoff) {
      continue;
    }
    out.traces.push_back(trace);
  }
  return out;
}

SplitSizes split_sizes(std::size_t n) {
  SplitSizes sizes;
  const std::size_t pool = (n * 67) / 100;
  sizes.test = n - pool;
  sizes.validation = (pool * 20) / 100;
  sizes.train = pool - sizes.validation;
  return sizes;
}

CohortSplit split_cohort(const EventLog& log, std::uint64_t seed) {
  const std::size_t n = log.traces.size();
  if (n < 5) throw DataError("split needs at least 5 traces, got " + std::to_string(n));
  const auto sizes = split_sizes(n);
  const auto order = seeded_permutation(n, seed);

  std::vector<int> part(n, 0);  // 0 train, 1 validation, 2 test
  for (std::size_t i = 0; i < n; ++i) {
    if (i < sizes.test) {
      part[order[i]] = 2;
    } else if (i < sizes.test + sizes.validation) {
      part[order[i]] = 1;
    }
  }
  CohortSplit split;
  split.seed = seed;
  for (auto* p : {&split.train, &split.validation, &split.test}) p->vocabulary = log.vocabulary;
  for (std::size_t i = 0; i < n; ++i) {
    auto& target = part[i] == 2 ? split.test : part[i] == 1 ? split.validation : split.train;
    target.traces.push_back(log.traces[i]);
  }
  return split;
}

}  // namespace careflow
