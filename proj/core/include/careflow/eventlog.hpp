#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "careflow/common.hpp"

namespace careflow {

enum class Insurance { Medicaid, Medicare, Private, SelfPay, Government };

inline constexpr std::array<Insurance, 5> kInsuranceCategories = {
    Insurance::Medicaid, Insurance::Medicare, Insurance::Private, Insurance::SelfPay,
    Insurance::Government};

std::string_view to_string(Insurance insurance);
std::optional<Insurance> parse_insurance(std::string_view text);

enum class Outcome { Discharge = 0, Death = 1 };

inline int label_of(Outcome outcome) { return outcome == Outcome::Death ? 1 : 0; }

struct EventInstance {
  std::string event;
  Timestamp timestamp = 0;

  bool operator==(const EventInstance&) const = default;
};

struct DemographicRecord {
  int age = 0;
  Insurance insurance = Insurance::Medicare;

  bool operator==(const DemographicRecord&) const = default;
};

/// One patient careflow: strictly time-ordered events ending in exactly
/// one exit event (DEATH or DISCH), plus the admission context.
struct Trace {
  std::string case_id;
  std::vector<EventInstance> events;
  DemographicRecord demographics;
  Outcome outcome = Outcome::Discharge;
  Timestamp admit_timestamp = 0;
  int prior_admissions = 0;

  /// Timestamp of the DEATH event, if any.
  std::optional<Timestamp> death_timestamp() const;

  bool operator==(const Trace&) const = default;
};

struct EventLog {
  std::vector<Trace> traces;  // ordered by case_id
  std::vector<std::string> vocabulary;  // sorted, unique

  bool operator==(const EventLog&) const = default;
};

/// Reads the events and demographics CSVs and returns a validated log.
///
/// Traces come back ordered by case_id with events sorted by timestamp.
/// When `declared_vocabulary` is given, any other event name is an error
/// and the log carries the declared vocabulary; otherwise the vocabulary
/// is the sorted set of observed names. Throws DataError naming the file
/// and line for malformed rows.
EventLog parse_event_log(std::istream& events, std::istream& demographics,
                         std::optional<std::span<const std::string_view>> declared_vocabulary = {});

/// Reads only the events CSV. Demographics are left at their defaults,
/// admit_timestamp is the first event, and the outcome follows the exit
/// event. Enough for discovery, which looks at event order alone.
EventLog parse_events_only(std::istream& events);

/// Checks every trace/log invariant; throws DataError on the first violation.
void validate(const EventLog& log);

void write_events_csv(std::ostream& out, const EventLog& log);
void write_demographics_csv(std::ostream& out, const EventLog& log);

/// Drops traces with age < 18, with no prior admission, or whose DEATH
/// falls strictly before admit + cutoff_hours.
EventLog filter_cohort(const EventLog& log, double cutoff_hours = 24.0);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

/// Pool = floor(0.67 n), test = n - pool, validation = floor(0.20 pool),
/// train = pool - validation. Exact integer arithmetic.
SplitSizes split_sizes(std::size_t n);

struct CohortSplit {
  EventLog train;
  EventLog validation;
  EventLog test;
  std::uint64_t seed = 0;
};

/// Seeded 67/33 then 80/20 split. Traces are permuted with
/// seeded_permutation(n, seed); the first `test` positions go to test, the
/// next `validation` to validation, the rest to train. Each part keeps
/// case_id order and the parent vocabulary. Needs at least 5 traces.
CohortSplit split_cohort(const EventLog& log, std::uint64_t seed);

/// Milliseconds for a fractional hour count, rounded to nearest.
Timestamp hours_to_ms(double hours);

}  // namespace careflow
