#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "careflow/eval.hpp"
#include "careflow/synthcohort.hpp"
#include "careflow/vocabulary.hpp"
#include "oracles.hpp"

using namespace careflow;
using doctest::Approx;

namespace {

std::size_t deaths(const EventLog& log) {
  return static_cast<std::size_t>(std::count_if(log.traces.begin(), log.traces.end(), [](const Trace& t) {
    return t.outcome == Outcome::Death;
  }));
}

// Logistic regression on abnormal-lab count and age, read back from the log.
double oracle_auc(const EventLog& log) {
  std::vector<double> x;
  std::vector<int> y;
  for (const auto& t : log.traces) {
    double abnormal = 0;
    for (const auto& e : t.events) abnormal += e.event.ends_with("_abn");
    x.push_back(abnormal);
    x.push_back(t.demographics.age / 100.0);
    y.push_back(label_of(t.outcome));
  }
  const auto beta = testing::logistic_irls(x, 2, y);
  return roc_auc(testing::logistic_predict(x, 2, beta), y);
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  CohortConfig cfg;
  cfg.n_patients = 120;
  cfg.seed = 5;
  CHECK(generate(cfg) == generate(cfg));
  auto other = cfg;
  other.seed = 6;
  CHECK(generate(cfg) != generate(other));
}

TEST_CASE("output parses, validates and stays inside the careflow vocabulary") {
  CohortConfig cfg;
  cfg.n_patients = 300;
  const auto [events, demographics] = generate(cfg);
  std::istringstream e(events), d(demographics);
  const auto log = parse_event_log(e, d, careflow_vocabulary());
  CHECK(log.traces.size() == 300);
  CHECK(log.traces.front().case_id == "p001");
  std::set<std::string> seen;
  for (const auto& t : log.traces) {
    for (const auto& ev : t.events) seen.insert(ev.event);
    CHECK(categorize(t.events.front().event) == EventCategory::Admission);
    CHECK(t.events.front().timestamp == t.admit_timestamp);
    CHECK(is_exit_event(t.events.back().event));
    CHECK(t.events.back().timestamp - t.admit_timestamp >= 25 * kMillisPerHour);
    CHECK(t.demographics.age >= 18);
    CHECK(t.prior_admissions >= 1);
  }
  CHECK(seen.size() > 30);
}

TEST_CASE("the intercept calibrates the mean death probability") {
  for (double signal : {0.0, 1.25, 3.0}) {
    CohortConfig cfg;
    cfg.n_patients = 500;
    cfg.signal_strength = signal;
    const auto cohort = generate_cohort(cfg);
    double mean = 0;
    for (const auto& t : cohort.truth) mean += t.death_probability;
    CHECK(mean / 500.0 == Approx(0.17).epsilon(1e-9));
  }
}

TEST_CASE("without signal the death count is binomial around the target rate") {
  CohortConfig cfg;
  cfg.n_patients = 2000;
  cfg.signal_strength = 0.0;
  cfg.seed = 13;
  const auto cohort = generate_cohort(cfg);
  for (const auto& t : cohort.truth) CHECK(t.death_probability == Approx(0.17).epsilon(1e-12));
  const double expected = 2000 * 0.17;
  const double sd = std::sqrt(2000 * 0.17 * 0.83);
  CHECK(std::abs(static_cast<double>(deaths(cohort.log)) - expected) < 3 * sd);
}

TEST_CASE("the planted signal is recoverable by a logistic oracle") {
  CohortConfig cfg;
  cfg.n_patients = 1017;
  cfg.signal_strength = 2.0;
  CHECK(oracle_auc(generate_cohort(cfg).log) > 0.9);
  cfg.signal_strength = 0.0;
  CHECK(oracle_auc(generate_cohort(cfg).log) < 0.65);
}

TEST_CASE("risk rule") {
  CHECK(risk_score(8, 54, 0.0) == 2.0);
  CHECK(risk_score(0, 90, 1.0) == 1.0);
  CHECK(risk_score(4, 18, 0.5) == 0.5);
}

TEST_CASE("planted violations are exactly the rows the cohort filter drops") {
  CohortConfig cfg;
  cfg.n_patients = 1067;
  cfg.n_violations = 50;
  const auto cohort = generate_cohort(cfg);
  const auto kept = filter_cohort(cohort.log, 24.0);
  CHECK(kept.traces.size() == 1017);
  std::set<std::string> kept_ids;
  for (const auto& t : kept.traces) kept_ids.insert(t.case_id);
  std::size_t planted = 0;
  for (const auto& truth : cohort.truth) {
    planted += truth.violation;
    CHECK(kept_ids.count(truth.case_id) == (truth.violation ? 0u : 1u));
  }
  CHECK(planted == 50);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    CohortConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(bad([](CohortConfig& c) { c.n_patients = 3; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](CohortConfig& c) { c.death_rate = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](CohortConfig& c) { c.signal_strength = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](CohortConfig& c) { c.n_violations = 2000; }).validate(), ConfigError);
  CHECK_THROWS_AS(generate_cohort(bad([](CohortConfig& c) { c.mean_events_per_patient = 2; })),
                  ConfigError);
  CHECK_NOTHROW(CohortConfig{}.validate());
}
