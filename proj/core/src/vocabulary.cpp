#include "careflow/vocabulary.hpp"

#include <algorithm>
#include <array>

namespace careflow {

namespace {

constexpr std::array<std::string_view, 49> kVocabulary = {
    "ADM_EMERGENCY", "creatinine",    "glucose_abn",   "hematocrit",     "hemoglobin",
    "lactate_abn",   "inr_abn",       "platelet",      "bicarbonate_abn", "ptt",
    "potassium",     "aniongap",      "pt_abn",        "sodium_abn",     "bun",
    "ICU_in_TSICU",  "bilirubin",     "hematocrit_abn", "sodium",        "albumin_abn",
    "pt",            "bun_abn",       "bicarbonate",   "ptt_abn",        "hemoglobin_abn",
    "creatinine_abn", "DISCH",        "platelet_abn",  "glucose",        "potassium_abn",
    "ICU_in_MICU",   "albumin",       "aniongap_abn",  "ICU_in_SICU",    "bilirubin_abn",
    "lactate",       "ICU_in_CCU",    "ADM_ELECTIVE",  "ICU_in_CSRU",    "DEATH",
    "ICU_out_TSICU", "wbc_abn",       "inr",           "ADM_URGENT",     "ICU_out_CSRU",
    "ICU_out_MICU",  "wbc",           "ICU_out_SICU",  "ICU_out_CCU",
};

constexpr std::array<std::string_view, 17> kLabItems = {
    "albumin", "aniongap", "bicarbonate", "bilirubin", "bun",      "creatinine",
    "glucose", "hematocrit", "hemoglobin", "inr",      "lactate",  "platelet",
    "potassium", "pt",     "ptt",         "sodium",    "wbc",
};

constexpr std::array<std::string_view, 5> kCareUnits = {"CCU", "CSRU", "MICU", "SICU", "TSICU"};

constexpr std::array<std::string_view, 3> kAdmissions = {"ADM_EMERGENCY", "ADM_ELECTIVE",
                                                         "ADM_URGENT"};

bool is_lab(std::string_view name) {
  constexpr std::string_view abn = "_abn";
  if (name.size() > abn.size() && name.substr(name.size() - abn.size()) == abn) {
    name.remove_suffix(abn.size());
  }
  return std::find(kLabItems.begin(), kLabItems.end(), name) != kLabItems.end();
}

bool is_care_unit_event(std::string_view name) {
  for (const std::string_view prefix : {std::string_view("ICU_in_"), std::string_view("ICU_out_")}) {
    if (name.substr(0, prefix.size()) == prefix) {
      const auto unit = name.substr(prefix.size());
      return std::find(kCareUnits.begin(), kCareUnits.end(), unit) != kCareUnits.end();
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(EventCategory category) {
  switch (category) {
    case EventCategory::Admission: return "admission";
    case EventCategory::CareUnit: return "careunit";
    case EventCategory::Lab: return "lab";
    case EventCategory::Exit: return "exit";
    case EventCategory::Unknown: break;
  }
  return "unknown";
}

std::span<const std::string_view> careflow_vocabulary() { return kVocabulary; }
std::span<const std::string_view> lab_items() { return kLabItems; }
std::span<const std::string_view> care_units() { return kCareUnits; }
std::span<const std::string_view> admission_events() { return kAdmissions; }

EventCategory categorize(std::string_view event_name) {
  if (is_exit_event(event_name)) return EventCategory::Exit;
  if (std::find(kAdmissions.begin(), kAdmissions.end(), event_name) != kAdmissions.end()) {
    return EventCategory::Admission;
  }
  if (is_care_unit_event(event_name)) return EventCategory::CareUnit;
  if (is_lab(event_name)) return EventCategory::Lab;
  return EventCategory::Unknown;
}

}  // namespace careflow
