#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "careflow/dataset.hpp"
#include "careflow/model.hpp"
#include "careflow/petrinet.hpp"

namespace careflow {

inline constexpr const char* kDemographicsGroup = "Demographics";
inline constexpr const char* kLabGroup = "LabMeasurementTypes";
inline constexpr const char* kAdmissionGroup = "AdmissionTypes";
inline constexpr const char* kCareUnitGroup = "CareUnitTypes";

struct FeatureGroup {
  std::string name;
  std::vector<std::size_t> columns;  // indices into [tss columns..., demographic columns...]

  bool operator==(const FeatureGroup&) const = default;
};

/// Partition of the model input columns into named groups plus an
/// explicit remainder that is never masked.
struct GroupDefinition {
  std::size_t width = 0;
  std::vector<FeatureGroup> groups;
  std::vector<std::size_t> ungrouped;

  /// Every column in [0, width) appears exactly once. Throws DataError.
  void validate() const;

  bool operator==(const GroupDefinition&) const = default;
};

/// For each place, the visible labels whose firing can put a token there,
/// looking back through hidden transitions.
using PlaceProvenance = std::vector<std::set<std::string>>;

PlaceProvenance place_provenance(const PetriNet& net);

/// Four clinical groups (Demographics, LabMeasurementTypes, AdmissionTypes,
/// CareUnitTypes). A place's f/c/m columns join the group of its feeding
/// labels' majority category; places fed by an exit event, by nothing, by
/// unknown labels, or without a strict majority stay ungrouped. All
/// demographic columns go to Demographics. Throws DataError when the
/// provenance does not cover every place.
GroupDefinition assign_groups(const PetriNet& net, const PlaceProvenance& provenance,
                              std::size_t demo_width = kDemographicWidth);

/// Exact Shapley values for `players` players by coalition enumeration.
/// `value` receives a bitmask (bit g set = player g present) and is called
/// once per coalition, in increasing mask order. At most 20 players.
std::vector<double> exact_shapley(std::size_t players,
                                  const std::function<double(std::uint32_t)>& value);

struct GroupAttribution {
  std::vector<std::string> groups;
  std::vector<double> phi;
  double baseline_value = 0.0;  // v(empty coalition)
  double full_value = 0.0;      // v(all groups)
};

/// Column means of the concatenated [sample, demographics] model input.
std::vector<double> column_means(const PredictionDataset& data);

/// v(S) = mean predicted probability over `data` with the columns of every
/// group outside S replaced by `baseline_means`. At most 12 groups; throws
/// DataError for an empty dataset.
GroupAttribution shapley_groups(const NetworkWeights& weights, const PredictionDataset& data,
                                const GroupDefinition& groups,
                                std::span<const double> baseline_means);

/// Group names by |phi| descending, ties by name.
std::vector<std::string> rank_groups(const GroupAttribution& attribution);

void write_groups_json(std::ostream& out, const GroupDefinition& groups);
GroupDefinition read_groups_json(std::istream& in);

/// {"groups": [{"name", "phi"}...], "baseline", "full", "ranking": [...]}
std::string attribution_to_json(const GroupAttribution& attribution);

}  // namespace careflow
