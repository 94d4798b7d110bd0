#include "careflow/synthcohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "careflow/vocabulary.hpp"

namespace careflow {

namespace {

constexpr Timestamp kBaseTime = 5'680'281'600'000;  // 2150-01-01T00:00:00Z
constexpr Timestamp kSecond = 1000;
constexpr Timestamp kYear = 365LL * 24 * kMillisPerHour;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <std::size_t N>
std::size_t categorical(Rng& rng, const double (&weights)[N]) {
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return N - 1;
}

enum class Violation { None, Minor, NoPriorAdmission, EarlyDeath };

struct Draft {
  Trace trace;
  PatientTruth truth;
  Violation violation = Violation::None;
};

std::string case_id(std::size_t i, std::size_t n) {
  const auto digits = std::to_string(n).size();
  std::string number = std::to_string(i + 1);
  return "p" + std::string(digits - number.size(), '0') + number;
}

Draft draft_patient(const CohortConfig& cfg, std::size_t i, Violation violation) {
  Rng rng(derive_seed(cfg.seed, i + 1));
  Draft d;
  d.violation = violation;
  auto& t = d.trace;
  t.case_id = case_id(i, cfg.n_patients);

  t.demographics.age = violation == Violation::Minor ? 10 + static_cast<int>(rng.below(8))
                                                     : 18 + static_cast<int>(rng.below(73));
  static constexpr double kInsuranceShare[] = {0.12, 0.45, 0.30, 0.08, 0.05};
  t.demographics.insurance = kInsuranceCategories[categorical(rng, kInsuranceShare)];
  t.prior_admissions =
      violation == Violation::NoPriorAdmission ? 0 : 1 + static_cast<int>(rng.below(4));
  t.admit_timestamp = kBaseTime + static_cast<Timestamp>(rng.below(kYear / kSecond)) * kSecond;

  const Timestamp horizon = hours_to_ms(cfg.horizon_hours);
  Timestamp exit_offset = std::max(horizon, hours_to_ms(25.0)) + kSecond +
                          static_cast<Timestamp>(rng.below(72 * kMillisPerHour));
  Timestamp window = horizon;
  if (violation == Violation::EarlyDeath) {
    exit_offset = kMillisPerHour + static_cast<Timestamp>(rng.below(22 * kMillisPerHour));
    window = exit_offset;
  }

  const double frailty = rng.normal();
  const double p_abnormal = logistic(-1.0 + 1.5 * frailty);
  const std::size_t stays = 1 + rng.below(3);
  const std::size_t mean_labs =
      std::max<std::size_t>(cfg.mean_events_per_patient, 7) - 6;
  const std::size_t labs = 1 + rng.below(2 * mean_labs - 1);

  // Distinct offsets in [1 s, window); a random subset of 2 x stays of them
  // carries the care-unit in/out pairs, the rest are labs.
  const std::size_t total = labs + 2 * stays;
  std::set<Timestamp> offsets;
  while (offsets.size() < total) {
    offsets.insert(kSecond + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(window - kSecond))));
  }
  std::vector<bool> is_unit(total, false);
  std::fill(is_unit.begin(), is_unit.begin() + static_cast<std::ptrdiff_t>(2 * stays), true);
  rng.shuffle(is_unit);

  static constexpr double kAdmissionShare[] = {0.75, 0.15, 0.10};
  t.events.push_back({std::string(admission_events()[categorical(rng, kAdmissionShare)]),
                      t.admit_timestamp});
  std::string unit;
  bool inside = false;
  std::size_t abnormal = 0;
  std::size_t k = 0;
  for (const Timestamp offset : offsets) {
    const Timestamp at = t.admit_timestamp + offset;
    if (is_unit[k++]) {
      if (!inside) unit = std::string(care_units()[rng.below(care_units().size())]);
      t.events.push_back({(inside ? "ICU_out_" : "ICU_in_") + unit, at});
      inside = !inside;
      continue;
    }
    std::string name(lab_items()[rng.below(lab_items().size())]);
    if (rng.bernoulli(p_abnormal)) {
      name += "_abn";
      ++abnormal;
    }
    t.events.push_back({std::move(name), at});
  }
  t.events.push_back({"", t.admit_timestamp + exit_offset});

  d.truth.case_id = t.case_id;
  d.truth.age = t.demographics.age;
  d.truth.lab_events = labs;
  d.truth.abnormal_labs = abnormal;
  d.truth.risk = risk_score(abnormal, t.demographics.age, cfg.age_weight);
  d.truth.violation = violation != Violation::None;
  return d;
}

double mean_probability(const std::vector<Draft>& drafts, double intercept, double signal) {
  double sum = 0.0;
  for (const auto& d : drafts) sum += logistic(intercept + signal * d.truth.risk);
  return sum / static_cast<double>(drafts.size());
}

}  // namespace

void CohortConfig::validate() const {
  if (n_patients < 10) throw ConfigError("n_patients must be at least 10");
  if (!(death_rate > 0.0 && death_rate < 1.0)) throw ConfigError("death_rate must lie in (0, 1)");
  if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength)) {
    throw ConfigError("signal_strength must be finite and non-negative");
  }
  if (mean_events_per_patient < 7) throw ConfigError("mean_events_per_patient must be at least 7");
  if (!(horizon_hours >= 1.0 && horizon_hours <= 24.0 * 365)) {
    throw ConfigError("horizon_hours must lie in [1, 8760]");
  }
  if (!std::isfinite(age_weight)) throw ConfigError("age_weight must be finite");
  if (n_violations > n_patients) throw ConfigError("n_violations exceeds n_patients");
}

double risk_score(std::size_t abnormal_labs, int age, double age_weight) {
  return static_cast<double>(abnormal_labs) / 4.0 + age_weight * (age - 54) / 36.0;
}

SyntheticCohort generate_cohort(const CohortConfig& cfg) {
  cfg.validate();
  std::vector<Violation> violations(cfg.n_patients, Violation::None);
  const auto order = seeded_permutation(cfg.n_patients, derive_seed(cfg.seed, 0));
  for (std::size_t v = 0; v < cfg.n_violations; ++v) {
    violations[order[v]] = static_cast<Violation>(1 + v % 3);
  }

  std::vector<Draft> drafts;
  drafts.reserve(cfg.n_patients);
  for (std::size_t i = 0; i < cfg.n_patients; ++i) {
    drafts.push_back(draft_patient(cfg, i, violations[i]));
  }

  // Mean probability is increasing in the intercept.
  double lo = -60.0, hi = 60.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mean_probability(drafts, mid, cfg.signal_strength) < cfg.death_rate ? lo : hi) = mid;
  }
  SyntheticCohort cohort;
  cohort.intercept = 0.5 * (lo + hi);

  std::set<std::string> names;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    d.truth.death_probability = logistic(cohort.intercept + cfg.signal_strength * d.truth.risk);
    Rng outcome_rng(derive_seed(derive_seed(cfg.seed, i + 1), 1));
    const bool dies = d.violation == Violation::EarlyDeath ||
                      outcome_rng.bernoulli(d.truth.death_probability);
    d.trace.outcome = dies ? Outcome::Death : Outcome::Discharge;
    d.trace.events.back().event = std::string(dies ? kDeathEvent : kDischargeEvent);
    for (const auto& e : d.trace.events) names.insert(e.event);
    cohort.log.traces.push_back(std::move(d.trace));
    cohort.truth.push_back(std::move(d.truth));
  }
  cohort.log.vocabulary.assign(names.begin(), names.end());
  return cohort;
}

std::pair<std::string, std::string> generate(const CohortConfig& cfg) {
  const auto cohort = generate_cohort(cfg);
  std::ostringstream events, demographics;
  write_events_csv(events, cohort.log);
  write_demographics_csv(demographics, cohort.log);
  return {events.str(), demographics.str()};
}

}  // namespace careflow
