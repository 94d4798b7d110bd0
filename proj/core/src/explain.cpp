#include "careflow/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>

#include "careflow/vocabulary.hpp"

namespace careflow {

void GroupDefinition::validate() const {
  std::vector<int> hits(width, 0);
  auto mark = [&](std::size_t c) {
    if (c >= width) throw DataError("group column " + std::to_string(c) + " out of range");
    ++hits[c];
  };
  for (const auto& g : groups) {
    for (const auto c : g.columns) mark(c);
  }
  for (const auto c : ungrouped) mark(c);
  for (std::size_t c = 0; c < width; ++c) {
    if (hits[c] != 1) {
      throw DataError("column " + std::to_string(c) + " is assigned " + std::to_string(hits[c]) +
                      " times");
    }
  }
}

PlaceProvenance place_provenance(const PetriNet& net) {
  std::vector<std::vector<TransitionIndex>> producers(net.place_count());
  for (TransitionIndex t = 0; t < net.transition_count(); ++t) {
    for (const auto& out : net.outputs(t)) producers[out.place].push_back(t);
  }
  PlaceProvenance provenance(net.place_count());
  for (PlaceIndex p = 0; p < net.place_count(); ++p) {
    std::vector<bool> seen(net.place_count(), false);
    std::vector<PlaceIndex> stack{p};
    seen[p] = true;
    while (!stack.empty()) {
      const PlaceIndex q = stack.back();
      stack.pop_back();
      for (const TransitionIndex t : producers[q]) {
        const auto& transition = net.transitions()[t];
        if (transition.label) {
          provenance[p].insert(*transition.label);
          continue;
        }
        for (const auto& in : net.inputs(t)) {
          if (!seen[in.place]) {
            seen[in.place] = true;
            stack.push_back(in.place);
          }
        }
      }
    }
  }
  return provenance;
}

GroupDefinition assign_groups(const PetriNet& net, const PlaceProvenance& provenance,
                              std::size_t demo_width) {
  const std::size_t places = net.place_count();
  if (provenance.size() != places) throw DataError("place provenance does not cover the net");

  GroupDefinition def;
  def.width = 3 * places + demo_width;
  def.groups = {{kDemographicsGroup, {}}, {kLabGroup, {}}, {kAdmissionGroup, {}},
                {kCareUnitGroup, {}}};
  auto& demographics = def.groups[0].columns;
  auto& lab = def.groups[1].columns;
  auto& admission = def.groups[2].columns;
  auto& care_unit = def.groups[3].columns;

  for (PlaceIndex p = 0; p < places; ++p) {
    std::map<EventCategory, std::size_t> counts;
    for (const auto& label : provenance[p]) ++counts[categorize(label)];
    std::vector<std::size_t>* target = nullptr;
    if (!provenance[p].empty() && counts[EventCategory::Exit] == 0) {
      for (const auto& [category, count] : counts) {
        if (2 * count <= provenance[p].size()) continue;
        if (category == EventCategory::Lab) target = &lab;
        if (category == EventCategory::Admission) target = &admission;
        if (category == EventCategory::CareUnit) target = &care_unit;
      }
    }
    auto& bucket = target ? *target : def.ungrouped;
    for (std::size_t block = 0; block < 3; ++block) bucket.push_back(block * places + p);
  }
  for (std::size_t i = 0; i < demo_width; ++i) demographics.push_back(3 * places + i);
  for (auto& g : def.groups) std::sort(g.columns.begin(), g.columns.end());
  std::sort(def.ungrouped.begin(), def.ungrouped.end());
  def.validate();
  return def;
}

std::vector<double> exact_shapley(std::size_t players,
                                  const std::function<double(std::uint32_t)>& value) {
  if (players > 20) throw std::invalid_argument("exact Shapley supports at most 20 players");
  const std::uint32_t coalitions = 1u << players;
  std::vector<double> v(coalitions);
  for (std::uint32_t mask = 0; mask < coalitions; ++mask) v[mask] = value(mask);

  // weight[s] = s! (k - s - 1)! / k!
  std::vector<double> weight(players, 0.0);
  for (std::size_t s = 0; s < players; ++s) {
    double w = 1.0 / static_cast<double>(players);
    // 1/k * 1 / C(k-1, s)
    for (std::size_t i = 1; i <= s; ++i) {
      w *= static_cast<double>(i) / static_cast<double>(players - 1 - s + i);
    }
    weight[s] = w;
  }
  std::vector<double> phi(players, 0.0);
  for (std::size_t g = 0; g < players; ++g) {
    const std::uint32_t bit = 1u << g;
    for (std::uint32_t mask = 0; mask < coalitions; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      phi[g] += weight[size] * (v[mask | bit] - v[mask]);
    }
  }
  return phi;
}

std::vector<double> column_means(const PredictionDataset& data) {
  const std::size_t tss = data.samples.cols();
  std::vector<double> means(tss + data.demographics.cols(), 0.0);
  if (data.size() == 0) return means;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto s = data.samples.row(r);
    const auto d = data.demographics.row(r);
    for (std::size_t c = 0; c < s.size(); ++c) means[c] += s[c];
    for (std::size_t c = 0; c < d.size(); ++c) means[tss + c] += d[c];
  }
  for (auto& m : means) m /= static_cast<double>(data.size());
  return means;
}

GroupAttribution shapley_groups(const NetworkWeights& weights, const PredictionDataset& data,
                                const GroupDefinition& groups,
                                std::span<const double> baseline_means) {
  if (data.size() == 0) throw DataError("cannot explain an empty dataset");
  if (groups.groups.size() > 12) throw DataError("at most 12 feature groups are supported");
  groups.validate();
  const std::size_t tss = data.samples.cols();
  if (groups.width != tss + data.demographics.cols() || baseline_means.size() != groups.width) {
    throw DataError("group definition width does not match the dataset");
  }

  std::vector<double> sample(tss), demo(data.demographics.cols());
  auto value = [&](std::uint32_t mask) {
    double total = 0.0;
    for (std::size_t r = 0; r < data.size(); ++r) {
      const auto s = data.samples.row(r);
      const auto d = data.demographics.row(r);
      std::copy(s.begin(), s.end(), sample.begin());
      std::copy(d.begin(), d.end(), demo.begin());
      for (std::size_t g = 0; g < groups.groups.size(); ++g) {
        if (mask & (1u << g)) continue;
        for (const auto c : groups.groups[g].columns) {
          (c < tss ? sample[c] : demo[c - tss]) = baseline_means[c];
        }
      }
      total += forward(weights, sample, demo);
    }
    return total / static_cast<double>(data.size());
  };

  GroupAttribution out;
  for (const auto& g : groups.groups) out.groups.push_back(g.name);
  const std::size_t k = groups.groups.size();
  double empty = 0.0, full = 0.0;
  out.phi = exact_shapley(k, [&](std::uint32_t mask) {
    const double v = value(mask);
    if (mask == 0) empty = v;
    if (mask == (1u << k) - 1) full = v;
    return v;
  });
  out.baseline_value = empty;
  out.full_value = full;
  return out;
}

std::vector<std::string> rank_groups(const GroupAttribution& attribution) {
  std::vector<std::size_t> order(attribution.groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(attribution.phi[a]);
    const double fb = std::abs(attribution.phi[b]);
    if (fa != fb) return fa > fb;
    return attribution.groups[a] < attribution.groups[b];
  });
  std::vector<std::string> names;
  for (const auto i : order) names.push_back(attribution.groups[i]);
  return names;
}

void write_groups_json(std::ostream& out, const GroupDefinition& groups) {
  nlohmann::ordered_json j;
  j["width"] = groups.width;
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : groups.groups) {
    j["groups"].push_back({{"name", g.name}, {"columns", g.columns}});
  }
  j["ungrouped"] = groups.ungrouped;
  out << j.dump(2) << '\n';
}

GroupDefinition read_groups_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    GroupDefinition def;
    def.width = j.at("width").get<std::size_t>();
    for (const auto& g : j.at("groups")) {
      def.groups.push_back(
          {g.at("name").get<std::string>(), g.at("columns").get<std::vector<std::size_t>>()});
    }
    if (j.contains("ungrouped")) def.ungrouped = j.at("ungrouped").get<std::vector<std::size_t>>();
    def.validate();
    return def;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("group file: ") + e.what());
  }
}

std::string attribution_to_json(const GroupAttribution& attribution) {
  nlohmann::ordered_json j;
  j["groups"] = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < attribution.groups.size(); ++g) {
    j["groups"].push_back({{"name", attribution.groups[g]}, {"phi", attribution.phi[g]}});
  }
  j["baseline"] = attribution.baseline_value;
  j["full"] = attribution.full_value;
  j["ranking"] = rank_groups(attribution);
  return j.dump(2) + "\n";
}

}  // namespace careflow
