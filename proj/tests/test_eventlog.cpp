#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "careflow/eventlog.hpp"
#include "careflow/synthcohort.hpp"
#include "careflow/vocabulary.hpp"
#include "test_helpers.hpp"

using namespace careflow;
using careflow::testing::kT0;
using careflow::testing::make_log;
using careflow::testing::make_trace;

namespace {

const char* kEvents =
    "case_id,event,timestamp\n"
    "p2,ADM_ELECTIVE,2150-01-01T08:00:00.000Z\n"
    "p1,ADM_EMERGENCY,2150-01-01T00:00:00.000Z\n"
    "p1,DISCH,2150-01-03T00:00:00.000Z\n"
    "p1,glucose,2150-01-01T01:00:00.000Z\n"
    "p2,DEATH,2150-01-04T00:00:00.000Z\n";

const char* kDemographics =
    "case_id,age,insurance,admit_timestamp,prior_admissions,outcome\n"
    "p1,64,Medicare,2150-01-01T00:00:00.000Z,2,0\n"
    "p2,45,Private,2150-01-01T08:00:00.000Z,1,1\n";

EventLog parse(const std::string& events, const std::string& demo) {
  std::istringstream e(events), d(demo);
  return parse_event_log(e, d);
}

std::string error_of(const std::string& events, const std::string& demo) {
  try {
    parse(events, demo);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parses a minimal log into sorted traces") {
  const auto log = parse(kEvents, kDemographics);
  REQUIRE(log.traces.size() == 2);
  const auto& p1 = log.traces[0];
  CHECK(p1.case_id == "p1");
  REQUIRE(p1.events.size() == 3);
  CHECK(p1.events[0].event == "ADM_EMERGENCY");
  CHECK(p1.events[1].event == "glucose");
  CHECK(p1.events[2].event == "DISCH");
  CHECK(p1.events[0].timestamp == kT0);
  CHECK(p1.outcome == Outcome::Discharge);
  CHECK(p1.demographics == DemographicRecord{64, Insurance::Medicare});
  CHECK(p1.prior_admissions == 2);
  CHECK(log.traces[1].outcome == Outcome::Death);
  CHECK(log.traces[1].death_timestamp() == kT0 + 72 * kMillisPerHour);
  CHECK(log.vocabulary ==
        std::vector<std::string>{"ADM_ELECTIVE", "ADM_EMERGENCY", "DEATH", "DISCH", "glucose"});
}

TEST_CASE("CRLF input parses the same") {
  std::string e = kEvents, d = kDemographics;
  auto crlf = [](std::string s) {
    std::string out;
    for (char ch : s) {
      if (ch == '\n') out += '\r';
      out += ch;
    }
    return out;
  };
  CHECK(parse(crlf(e), crlf(d)) == parse(e, d));
}

TEST_CASE("malformed input names the problem") {
  std::string dup = kEvents;
  dup += "p1,lactate,2150-01-01T01:00:00.000Z\n";
  CHECK(error_of(dup, kDemographics).find("duplicate timestamp") != std::string::npos);

  std::string bad_ins = kDemographics;
  bad_ins.replace(bad_ins.find("Private"), 7, "Crypto");
  CHECK(error_of(kEvents, bad_ins).find("unknown insurance category 'Crypto'") !=
        std::string::npos);
  CHECK(error_of(kEvents, bad_ins).find("demographics line 3") != std::string::npos);

  const std::string one_demo =
      "case_id,age,insurance,admit_timestamp,prior_admissions,outcome\n"
      "p1,64,Medicare,2150-01-01T00:00:00.000Z,2,0\n";
  CHECK(error_of(kEvents, one_demo) == "missing demographics for case p2");

  std::string bad_ts = kEvents;
  bad_ts += "p1,lactate,yesterday\n";
  CHECK(error_of(bad_ts, kDemographics).find("events line 7") != std::string::npos);

  CHECK(error_of("case,event,time\n", kDemographics).find("header") != std::string::npos);

  std::string bad_outcome = kDemographics;
  bad_outcome.replace(bad_outcome.rfind(",1"), 2, ",0");
  CHECK(error_of(kEvents, bad_outcome).find("outcome") != std::string::npos);

  std::string no_exit =
      "case_id,event,timestamp\n"
      "p1,ADM_EMERGENCY,2150-01-01T00:00:00.000Z\n"
      "p2,ADM_ELECTIVE,2150-01-01T08:00:00.000Z\n"
      "p2,DEATH,2150-01-04T00:00:00.000Z\n";
  CHECK(error_of(no_exit, kDemographics).find("exactly one exit event") != std::string::npos);

  std::string exit_not_last = kEvents;
  exit_not_last += "p1,lactate,2150-01-05T00:00:00.000Z\n";
  CHECK(error_of(exit_not_last, kDemographics).find("not last") != std::string::npos);
}

TEST_CASE("declared vocabulary rejects other names") {
  const auto vocab = careflow_vocabulary();
  std::istringstream e(kEvents), d(kDemographics);
  const auto log = parse_event_log(e, d, vocab);
  CHECK(log.vocabulary.size() == 49);

  std::string odd = kEvents;
  odd += "p1,mystery,2150-01-01T02:00:00.000Z\n";
  std::istringstream e2(odd), d2(kDemographics);
  CHECK_THROWS_AS(parse_event_log(e2, d2, vocab), DataError);
}

TEST_CASE("event-log CSV round trip") {
  CohortConfig cfg;
  cfg.n_patients = 60;
  cfg.seed = 3;
  const auto log = generate_cohort(cfg).log;
  std::ostringstream e, d;
  write_events_csv(e, log);
  write_demographics_csv(d, log);
  CHECK(parse(e.str(), d.str()) == log);
}

TEST_CASE("cohort filter boundaries") {
  const auto adult = make_trace("a", {{"ADM_EMERGENCY", 0}, {"DISCH", 60 * 30}}, 18);
  const auto minor = make_trace("b", {{"ADM_EMERGENCY", 0}, {"DISCH", 60 * 30}}, 17);
  const auto first_admission = make_trace("c", {{"ADM_EMERGENCY", 0}, {"DISCH", 60 * 30}}, 60, 0);
  const auto early_death = make_trace("d", {{"ADM_EMERGENCY", 0}, {"DEATH", 60 * 20}});
  const auto death_at_cutoff = make_trace("e", {{"ADM_EMERGENCY", 0}, {"DEATH", 60 * 24}});
  const auto late_death = make_trace("f", {{"ADM_EMERGENCY", 0}, {"DEATH", 60 * 25}});
  const auto early_discharge = make_trace("g", {{"ADM_EMERGENCY", 0}, {"DISCH", 60 * 2}});
  const auto log = make_log(
      {adult, minor, first_admission, early_death, death_at_cutoff, late_death, early_discharge});

  const auto kept = filter_cohort(log, 24.0);
  std::vector<std::string> ids;
  for (const auto& t : kept.traces) ids.push_back(t.case_id);
  CHECK(ids == std::vector<std::string>{"a", "e", "f", "g"});
  CHECK(kept.vocabulary == log.vocabulary);

  CHECK(filter_cohort(kept, 24.0) == kept);
  CHECK(filter_cohort(log, 19.0).traces.size() == 5);
}

TEST_CASE("split sizes follow the integer rule") {
  const auto s = split_sizes(1017);
  CHECK(s.train + s.validation == 681);
  CHECK(s.test == 336);
  CHECK(s.train == 545);
  CHECK(s.validation == 136);
  for (std::size_t n = 5; n < 3000; ++n) {
    const auto z = split_sizes(n);
    CHECK(z.train + z.validation + z.test == n);
    CHECK(z.train + z.validation == n * 67 / 100);
    CHECK(z.validation == (z.train + z.validation) / 5);
  }
}

TEST_CASE("split is a seeded partition") {
  CohortConfig cfg;
  cfg.n_patients = 200;
  const auto log = generate_cohort(cfg).log;
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto a = split_cohort(log, seed);
    const auto b = split_cohort(log, seed);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    std::multiset<std::string> all;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
      CHECK(part->vocabulary == log.vocabulary);
      CHECK(std::is_sorted(part->traces.begin(), part->traces.end(),
                           [](const Trace& x, const Trace& y) { return x.case_id < y.case_id; }));
      for (const auto& t : part->traces) all.insert(t.case_id);
    }
    CHECK(all.size() == 200);
    CHECK(std::set<std::string>(all.begin(), all.end()).size() == 200);
    CHECK(a.test.traces.size() == split_sizes(200).test);
  }
  CHECK(split_cohort(log, 1).test != split_cohort(log, 2).test);
}

TEST_CASE("split needs five traces") {
  CohortConfig cfg;
  cfg.n_patients = 10;
  auto log = generate_cohort(cfg).log;
  log.traces.resize(4);
  CHECK_THROWS_AS(split_cohort(log, 1), DataError);
  log = generate_cohort(cfg).log;
  log.traces.resize(5);
  CHECK(split_cohort(log, 1).test.traces.size() == 2);
}

TEST_CASE("hours_to_ms rounds to the nearest millisecond") {
  CHECK(hours_to_ms(24.0) == 24 * kMillisPerHour);
  CHECK(hours_to_ms(0.5) == kMillisPerHour / 2);
}

TEST_CASE("vocabulary categories") {
  CHECK(careflow_vocabulary().size() == 49);
  CHECK(lab_items().size() == 17);
  CHECK(categorize("ADM_EMERGENCY") == EventCategory::Admission);
  CHECK(categorize("ICU_in_MICU") == EventCategory::CareUnit);
  CHECK(categorize("ICU_out_CCU") == EventCategory::CareUnit);
  CHECK(categorize("lactate_abn") == EventCategory::Lab);
  CHECK(categorize("DEATH") == EventCategory::Exit);
  CHECK(categorize("mystery") == EventCategory::Unknown);
  std::set<std::string_view> names(careflow_vocabulary().begin(), careflow_vocabulary().end());
  CHECK(names.size() == 49);
}
