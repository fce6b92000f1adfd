#include "duelist/events.hpp"

namespace duelist {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::SwitchIn: return "switch";
    case EventKind::UseMove: return "move";
    case EventKind::Miss: return "miss";
    case EventKind::FullyParalyzed: return "paralyzed";
    case EventKind::Damage: return "damage";
    case EventKind::Heal: return "heal";
    case EventKind::StatusApplied: return "status";
    case EventKind::StatChange: return "boost";
    case EventKind::WeatherStart: return "weather-start";
    case EventKind::WeatherEnd: return "weather-end";
    case EventKind::ConditionStart: return "condition-start";
    case EventKind::ConditionEnd: return "condition-end";
    case EventKind::Residual: return "residual";
    case EventKind::ItemActivated: return "item";
    case EventKind::ItemConsumed: return "item-consumed";
    case EventKind::AbilityActivated: return "ability";
    case EventKind::Immune: return "immune";
    case EventKind::Faint: return "faint";
    case EventKind::Win: return "win";
    case EventKind::Timeout: return "timeout";
  }
  return "?";
}

}  // namespace duelist
