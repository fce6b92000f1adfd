#pragma once

#include <optional>
#include <vector>

#include "duelist/dex.hpp"
#include "duelist/events.hpp"
#include "duelist/random.hpp"
#include "duelist/state.hpp"

namespace duelist {

// Event -> side labelling used by every RandomSource draw:
//   accuracy check, damage roll, foe-targeted secondary effect -> defender's side
//   self-targeted effect chance, paralysis skip                -> actor's side
//   speed tie                                                  -> side 0
inline constexpr double kParalysisSkipChance = 0.25;
inline constexpr int kWeatherTurns = 5;
inline constexpr int kTailwindTurns = 3;
inline constexpr int kMaxToxicSpikes = 2;

// Stage multiplier for a stat stage in [-6, 6].
double stage_multiplier(int stage);

// Speed used for move ordering: stages, paralysis (x0.5), tailwind (x2) and
// weather-speed abilities (x2).
double effective_speed(const Dex& dex, const BattleState& state, int side);

// Type effectiveness of `move_type` against the defender's types, including
// ability immunities when `defender` is given.
double type_effectiveness(const Dex& dex, TypeId move_type, const SpeciesDef& defender);

// Damage of `move` from attacker to defender with damage roll `roll` in [0,1].
//   base = floor(floor(floor(2*L/5+2) * P * A / D) / 50) + 2
// then, flooring after each: random (0.85 + 0.15*roll), same-type bonus x1.5,
// type effectiveness, weather, ability/item modifiers. At least 1 unless the
// effectiveness is 0.
int damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, const MoveDef& move,
           double roll, const BattleState& ctx);

// Damage of the fallback move (power 50, typeless, physical, no type bonus).
int struggle_damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, double roll);

// Legal actions for `side`, ordered moves first (by slot) then switches (by
// team index). Throws StateError on a finished battle.
std::vector<Action> legal_actions(const Dex& dex, const BattleState& state, int side);

bool is_legal(const Dex& dex, const BattleState& state, int side, const Action& action);

struct TurnResult {
  BattleState state;
  EventLog events;
};

// Resolves one decision point. Throws std::invalid_argument naming the side
// when an action is illegal.
TurnResult resolve_turn(const Dex& dex, const BattleState& state, const Action& action0,
                        const Action& action1, RandomSource& rng);

// Variant that writes into caller-owned storage; `events` may be null.
void resolve_turn_into(const Dex& dex, const BattleState& state, const Action& action0,
                       const Action& action1, RandomSource& rng, BattleState& out, EventLog* events);

// Side whose opponent has no Pokemon left, if any.
std::optional<int> winner(const BattleState& state);

}  // namespace duelist
