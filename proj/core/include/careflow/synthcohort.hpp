#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "careflow/eventlog.hpp"

namespace careflow {

struct CohortConfig {
  std::size_t n_patients = 1017;
  std::uint64_t seed = 7;
  double death_rate = 0.17;
  double signal_strength = 1.25;
  std::size_t mean_events_per_patient = 22;
  double horizon_hours = 24.0;
  /// Weight of standardized age in the risk score. Zero keeps the
  /// mortality signal entirely in the lab events.
  double age_weight = 0.0;
  /// Patients planted to fail the cohort filter (age < 18, no prior
  /// admission, or death before 24 h, in rotation). Counted in n_patients.
  std::size_t n_violations = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// The generating quantities behind one synthetic patient.
struct PatientTruth {
  std::string case_id;
  int age = 0;
  std::size_t lab_events = 0;
  std::size_t abnormal_labs = 0;
  double risk = 0.0;
  double death_probability = 0.0;
  bool violation = false;
};

struct SyntheticCohort {
  EventLog log;
  std::vector<PatientTruth> truth;  // same order as log.traces
  double intercept = 0.0;
};

/// risk = abnormal_labs / 4 + age_weight * (age - 54) / 36
double risk_score(std::size_t abnormal_labs, int age, double age_weight);

/// Draws a cohort. Each patient has one admission event, one to three
/// care-unit stays, lab events inside the first horizon_hours, then DEATH
/// or DISCH at least 25 h after admission. A latent frailty drives the
/// share of abnormal labs; P(death) = logistic(intercept + signal *
/// risk), with the intercept set by bisection so the mean probability over
/// the cohort equals death_rate. Patient i draws from its own seed
/// derived from (seed, i + 1), so output is independent of thread count.
SyntheticCohort generate_cohort(const CohortConfig& cfg);

/// (events CSV, demographics CSV) in the event-log file format.
std::pair<std::string, std::string> generate(const CohortConfig& cfg);

}  // namespace careflow
