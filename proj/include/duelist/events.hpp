#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace duelist {

enum class EventKind : std::uint8_t {
  SwitchIn,         // slot = incoming team index, id = species
  UseMove,          // slot = user, id = move (struggle: id = 0xFFFF)
  Miss,             // side = attacker
  FullyParalyzed,   // side = actor
  Damage,           // side = target, amount, hp_after
  Heal,             // side = target, amount, hp_after (move heal)
  StatusApplied,    // side = target, id = Status
  StatChange,       // side = target, id = Stat, amount = applied delta
  WeatherStart,     // id = Weather
  WeatherEnd,       // id = Weather
  ConditionStart,   // side = affected side, id = SideCondition
  ConditionEnd,     // side = affected side, id = SideCondition
  Residual,         // side = target, id = Status, amount, hp_after
  ItemActivated,    // side, slot, id = item; amount/hp_after when it healed
  ItemConsumed,     // side, slot, id = item
  AbilityActivated, // side, slot, id = ability
  Immune,           // side = target (type or ability immunity)
  Faint,            // side, slot
  Win,              // side = winner
  Timeout,          // side = late side (server only)
};

const char* to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::SwitchIn;
  std::int8_t side = 0;
  std::int8_t slot = -1;
  std::uint16_t id = 0;
  std::int32_t amount = 0;
  std::uint16_t hp_after = 0;
  std::uint16_t max_hp = 0;

  bool operator==(const Event&) const = default;
};

using EventLog = std::vector<Event>;

}  // namespace duelist
