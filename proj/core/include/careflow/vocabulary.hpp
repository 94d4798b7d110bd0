#pragma once

#include <span>
#include <string_view>

namespace careflow {

/// Clinical category of a careflow event name.
enum class EventCategory { Admission, CareUnit, Lab, Exit, Unknown };

std::string_view to_string(EventCategory category);

inline constexpr std::string_view kDeathEvent = "DEATH";
inline constexpr std::string_view kDischargeEvent = "DISCH";

/// The 49 careflow event names, in transition-label table order.
/// The emergency admission label is canonicalized to ADM_EMERGENCY.
std::span<const std::string_view> careflow_vocabulary();

/// The 17 lab items; each has a normal form (`<item>`) and an
/// abnormal form (`<item>_abn`).
std::span<const std::string_view> lab_items();

/// CCU, CSRU, MICU, SICU, TSICU.
std::span<const std::string_view> care_units();

/// ADM_EMERGENCY, ADM_ELECTIVE, ADM_URGENT.
std::span<const std::string_view> admission_events();

EventCategory categorize(std::string_view event_name);

inline bool is_exit_event(std::string_view name) {
  return name == kDeathEvent || name == kDischargeEvent;
}

}  // namespace careflow
