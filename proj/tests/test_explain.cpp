#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "careflow/discovery.hpp"
#include "careflow/explain.hpp"
#include "careflow/synthcohort.hpp"
#include "oracles.hpp"

using namespace careflow;
using doctest::Approx;

namespace {

// source -> ADM_EMERGENCY -> a -> tau -> b ; b -> creatinine -> c ;
// b -> ICU_in_MICU -> c ; c -> DEATH -> sink ; c -> glucose -> d ; c -> lactate -> d
PetriNet clinical_net() {
  PetriNet net;
  for (const char* p : {"source", "a", "b", "c", "d", "sink"}) net.add_place(p);
  net.add_transition("t_adm", "ADM_EMERGENCY");
  net.add_transition("t_tau");
  net.add_transition("t_cre", "creatinine");
  net.add_transition("t_icu", "ICU_in_MICU");
  net.add_transition("t_death", "DEATH");
  net.add_transition("t_glu", "glucose");
  net.add_transition("t_lac", "lactate");
  net.add_arc("source", "t_adm");
  net.add_arc("t_adm", "a");
  net.add_arc("a", "t_tau");
  net.add_arc("t_tau", "b");
  net.add_arc("b", "t_cre");
  net.add_arc("t_cre", "c");
  net.add_arc("b", "t_icu");
  net.add_arc("t_icu", "c");
  net.add_arc("c", "t_death");
  net.add_arc("t_death", "sink");
  net.add_arc("c", "t_glu");
  net.add_arc("t_glu", "d");
  net.add_arc("c", "t_lac");
  net.add_arc("t_lac", "d");
  net.set_initial_tokens("source", 1);
  return net;
}

std::vector<double> random_game(Rng& rng, std::size_t players) {
  std::vector<double> v(std::size_t{1} << players);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

PredictionDataset toy_dataset(std::size_t rows, std::size_t places, std::uint64_t seed) {
  Rng rng(seed);
  PredictionDataset data;
  data.samples = Matrix(0, 3 * places);
  data.demographics = Matrix(0, kDemographicWidth);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> x(3 * places);
    for (auto& v : x) v = rng.uniform();
    data.samples.append_row(x);
    data.demographics.append_row(
        encode_demographics({20 + static_cast<int>(rng.below(60)), Insurance::Private}));
    data.labels.push_back(static_cast<int>(r % 2));
    data.case_ids.push_back(std::to_string(r));
  }
  return data;
}

}  // namespace

TEST_CASE("provenance looks back through hidden transitions") {
  const auto net = clinical_net();
  const auto prov = place_provenance(net);
  CHECK(prov[0].empty());
  CHECK(prov[1] == std::set<std::string>{"ADM_EMERGENCY"});
  CHECK(prov[2] == std::set<std::string>{"ADM_EMERGENCY"});
  CHECK(prov[3] == std::set<std::string>{"ICU_in_MICU", "creatinine"});
  CHECK(prov[4] == std::set<std::string>{"glucose", "lactate"});
  CHECK(prov[5] == std::set<std::string>{"DEATH"});
}

TEST_CASE("groups follow the strict majority category") {
  const auto net = clinical_net();
  const auto groups = assign_groups(net, place_provenance(net));
  const std::size_t P = 6;
  CHECK(groups.width == 3 * P + kDemographicWidth);
  REQUIRE(groups.groups.size() == 4);
  CHECK(groups.groups[0].name == "Demographics");
  CHECK(groups.groups[1].name == "LabMeasurementTypes");
  CHECK(groups.groups[2].name == "AdmissionTypes");
  CHECK(groups.groups[3].name == "CareUnitTypes");
  CHECK(groups.groups[0].columns == std::vector<std::size_t>{18, 19, 20, 21, 22, 23});
  CHECK(groups.groups[1].columns == std::vector<std::size_t>{4, 10, 16});
  CHECK(groups.groups[2].columns == std::vector<std::size_t>{1, 2, 7, 8, 13, 14});
  CHECK(groups.groups[3].columns.empty());
  // source (nothing), c (tie), sink (exit)
  CHECK(groups.ungrouped == std::vector<std::size_t>{0, 3, 5, 6, 9, 11, 12, 15, 17});
  CHECK_THROWS_AS(assign_groups(net, PlaceProvenance(2)), DataError);
}

TEST_CASE("groups partition the input columns of a discovered net") {
  CohortConfig cfg;
  cfg.n_patients = 80;
  const auto log = generate_cohort(cfg).log;
  const auto net = discover(log);
  const auto groups = assign_groups(net, place_provenance(net));
  CHECK_NOTHROW(groups.validate());
  std::size_t total = groups.ungrouped.size();
  for (const auto& g : groups.groups) total += g.columns.size();
  CHECK(total == groups.width);
  CHECK(groups.width == 3 * net.place_count() + kDemographicWidth);
  CHECK_FALSE(groups.groups[1].columns.empty());
  CHECK_FALSE(groups.groups[2].columns.empty());
  CHECK_FALSE(groups.groups[3].columns.empty());
}

TEST_CASE("group validation catches gaps and overlaps") {
  GroupDefinition def{4, {{"a", {0, 1}}, {"b", {2}}}, {3}};
  CHECK_NOTHROW(def.validate());
  auto overlap = def;
  overlap.groups[1].columns.push_back(1);
  CHECK_THROWS_AS(overlap.validate(), DataError);
  auto gap = def;
  gap.ungrouped.clear();
  CHECK_THROWS_AS(gap.validate(), DataError);
  auto out_of_range = def;
  out_of_range.ungrouped.push_back(9);
  CHECK_THROWS_AS(out_of_range.validate(), DataError);
}

TEST_CASE("coalition formula equals the permutation average") {
  Rng rng(6);
  for (std::size_t k : {1u, 2u, 3u, 4u, 5u}) {
    for (int round = 0; round < 20; ++round) {
      const auto v = random_game(rng, k);
      auto value = [&](std::uint32_t mask) { return v[mask]; };
      const auto exact = exact_shapley(k, value);
      const auto oracle = testing::permutation_shapley(k, value);
      for (std::size_t g = 0; g < k; ++g) CHECK(std::abs(exact[g] - oracle[g]) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(exact_shapley(21, [](std::uint32_t) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("Shapley axioms: efficiency, dummy, symmetry") {
  Rng rng(7);
  for (int round = 0; round < 30; ++round) {
    const auto base = random_game(rng, 3);
    // Player 3 is a dummy; players 1 and 2 are interchangeable.
    auto value = [&](std::uint32_t mask) {
      std::uint32_t m = mask & 7u;
      if ((m & 6u) == 2u) m = (m & 1u) | 4u;
      if ((m & 6u) == 4u) m = (m & 1u) | 4u;
      return base[m];
    };
    const auto phi = exact_shapley(4, value);
    CHECK(phi[3] == 0.0);
    CHECK(phi[1] == Approx(phi[2]).epsilon(1e-12));
    const double sum = std::accumulate(phi.begin(), phi.end(), 0.0);
    CHECK(sum == Approx(value(15) - value(0)).epsilon(1e-12));
  }
}

TEST_CASE("value function masks groups with the baseline means") {
  const std::size_t P = 4;
  const auto data = toy_dataset(25, P, 3);
  const auto w = init_weights(3 * P, 11);
  GroupDefinition groups;
  groups.width = 3 * P + kDemographicWidth;
  groups.groups = {{"first", {0, 4, 8}}, {"second", {1, 5, 9, 2, 6, 10}}, {"demo", {}}};
  for (std::size_t i = 0; i < kDemographicWidth; ++i) groups.groups[2].columns.push_back(3 * P + i);
  groups.ungrouped = {3, 7, 11};

  const auto baseline = column_means(toy_dataset(40, P, 4));
  const auto att = shapley_groups(w, data, groups, baseline);

  auto mean_with = [&](std::uint32_t present) {
    double sum = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
      std::vector<double> x(data.samples.row(r).begin(), data.samples.row(r).end());
      std::vector<double> d(data.demographics.row(r).begin(), data.demographics.row(r).end());
      for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        if (present & (1u << g)) continue;
        for (const auto c : groups.groups[g].columns) {
          (c < 3 * P ? x[c] : d[c - 3 * P]) = baseline[c];
        }
      }
      sum += forward(w, x, d);
    }
    return sum / static_cast<double>(data.size());
  };
  CHECK(att.full_value == Approx(mean_with(7)).epsilon(1e-14));
  CHECK(att.baseline_value == Approx(mean_with(0)).epsilon(1e-14));
  const auto oracle = testing::permutation_shapley(3, mean_with);
  for (std::size_t g = 0; g < 3; ++g) CHECK(std::abs(att.phi[g] - oracle[g]) <= 1e-12);
  const double sum = std::accumulate(att.phi.begin(), att.phi.end(), 0.0);
  CHECK(std::abs(sum - (att.full_value - att.baseline_value)) <= 1e-9);
}

TEST_CASE("a group the network ignores gets exactly zero") {
  const std::size_t P = 3;
  const auto data = toy_dataset(20, P, 9);
  auto w = init_weights(3 * P, 2);
  for (std::size_t o = 0; o < w.tss_hidden.outputs; ++o) {
    for (const std::size_t c : {2u, 5u, 8u}) w.tss_hidden.w(o, c) = 0.0;
  }
  GroupDefinition groups{3 * P + kDemographicWidth,
                         {{"used", {0, 1, 3, 4, 6, 7}}, {"ignored", {2, 5, 8}}, {"demo", {}}},
                         {}};
  for (std::size_t i = 0; i < kDemographicWidth; ++i) groups.groups[2].columns.push_back(3 * P + i);
  const auto att = shapley_groups(w, data, groups, column_means(toy_dataset(30, P, 10)));
  CHECK(att.phi[1] == 0.0);
  CHECK(att.phi[0] != 0.0);
}

TEST_CASE("shapley_groups argument checks") {
  const auto data = toy_dataset(5, 3, 1);
  const auto w = init_weights(9, 1);
  const std::size_t width = 9 + kDemographicWidth;
  GroupDefinition wrong_width{7, {{"g", {0, 1, 2, 3, 4, 5, 6}}}, {}};
  CHECK_THROWS_AS(shapley_groups(w, data, wrong_width, column_means(data)), DataError);
  GroupDefinition fine{width, {{"all", {}}}, {}};
  for (std::size_t c = 0; c < width; ++c) fine.groups[0].columns.push_back(c);
  CHECK_NOTHROW(shapley_groups(w, data, fine, column_means(data)));
  CHECK_THROWS_AS(
      shapley_groups(w, data.subset(std::vector<std::size_t>{}), fine, column_means(data)),
      DataError);
  GroupDefinition many{width, {}, {}};
  for (std::size_t c = 0; c < width; ++c) many.groups.push_back({"g" + std::to_string(c), {c}});
  CHECK_THROWS_AS(shapley_groups(w, data, many, column_means(data)), DataError);
}

TEST_CASE("ranking by absolute attribution, ties by name") {
  GroupAttribution att;
  att.groups = {"Demographics", "LabMeasurementTypes", "AdmissionTypes", "CareUnitTypes"};
  att.phi = {0.01, -0.2, 0.05, 0.05};
  CHECK(rank_groups(att) == std::vector<std::string>{"LabMeasurementTypes", "AdmissionTypes",
                                                      "CareUnitTypes", "Demographics"});
}

TEST_CASE("group and attribution JSON") {
  const auto net = clinical_net();
  const auto groups = assign_groups(net, place_provenance(net));
  std::stringstream ss;
  write_groups_json(ss, groups);
  CHECK(read_groups_json(ss) == groups);
  std::istringstream bad("{\"width\": 2, \"groups\": [{\"name\": \"a\", \"columns\": [0]}], \"ungrouped\": []}");
  CHECK_THROWS_AS(read_groups_json(bad), DataError);

  GroupAttribution att{{"a", "b"}, {0.25, -0.5}, 0.1, -0.15};
  const auto j = nlohmann::json::parse(attribution_to_json(att));
  CHECK(j.at("groups")[1].at("phi").get<double>() == -0.5);
  CHECK(j.at("ranking")[0].get<std::string>() == "b");
  CHECK(j.at("baseline").get<double>() == 0.1);
}
