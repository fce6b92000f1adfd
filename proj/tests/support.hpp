#pragma once

#include <random>
#include <string>
#include <vector>

#include "duelist/dex.hpp"
#include "duelist/engine.hpp"
#include "duelist/state.hpp"
#include "duelist/team.hpp"

namespace duelist::testing {

inline const Dex& dex24() {
  static const Dex dex = load_dex(std::string(DUELIST_DATA_DIR) + "/dex24.json");
  return dex;
}

inline const Dex& dex64() {
  static const Dex dex = load_dex(std::string(DUELIST_DATA_DIR) + "/dex64.json");
  return dex;
}

inline Build build(const Dex& dex, const std::string& species, const std::vector<std::string>& moves,
                   const std::string& ability = "", const std::string& item = "") {
  Build b;
  b.species = dex.find_species(species).value();
  for (const auto& m : moves) b.moves.push_back(dex.find_move(m).value());
  b.ability = ability.empty() ? dex.species(b.species).abilities.front() : dex.find_ability(ability).value();
  if (!item.empty()) b.item = dex.find_item(item).value();
  return b;
}

// Tiny hand-written dex: two types where fire is weak to water, one
// immunity, and species whose stats come out round at level 100.
inline const char* kMiniDex = R"({
  "types": ["fire", "water", "ghost"],
  "chart": [[0.5, 0.5, 1], [2, 0.5, 1], [1, 1, 0]],
  "moves": [
    {"name": "flame", "type": "fire", "category": "physical", "power": 80, "accuracy": 1.0, "pp": 10, "priority": 0},
    {"name": "splash", "type": "water", "category": "special", "power": 80, "accuracy": 1.0, "pp": 10, "priority": 0},
    {"name": "wisp", "type": "ghost", "category": "physical", "power": 80, "accuracy": 0.3, "pp": 10, "priority": 0},
    {"name": "jab", "type": "fire", "category": "physical", "power": 30, "accuracy": 1.0, "pp": 1, "priority": 1},
    {"name": "ember", "type": "fire", "category": "special", "power": 40, "accuracy": 1.0, "pp": 20, "priority": 0,
     "effect": {"kind": "status", "status": "burn", "chance": 0.1}},
    {"name": "zap", "type": "water", "category": "status", "power": 0, "accuracy": 0.9, "pp": 20, "priority": 0,
     "effect": {"kind": "status", "status": "paralysis"}},
    {"name": "poke", "type": "fire", "category": "physical", "power": 10, "accuracy": 1.0, "pp": 20, "priority": 0}
  ],
  "species": [
    {"name": "Cinder", "types": ["fire"], "base": {"hp": 100, "atk": 100, "def": 100, "spa": 100, "spd": 100, "spe": 100},
     "learnset": ["flame", "jab", "ember", "wisp", "poke"]},
    {"name": "Puddle", "types": ["water"], "base": {"hp": 100, "atk": 100, "def": 100, "spa": 100, "spd": 100, "spe": 50},
     "learnset": ["splash", "zap", "flame", "poke"]},
    {"name": "Shade", "types": ["ghost"], "base": {"hp": 60, "atk": 80, "def": 80, "spa": 80, "spd": 80, "spe": 120},
     "learnset": ["wisp", "poke", "jab"]}
  ]
})";

inline const Dex& mini_dex() {
  static const Dex dex = load_dex_text(kMiniDex, nullptr, "mini");
  return dex;
}

// Random teams played forward with random legal actions for up to `turns`
// decision points; stops early rather than finishing the battle.
inline BattleState random_midgame(const Dex& dex, std::mt19937_64& rng, int team_size, int turns) {
  auto state = make_battle(dex, random_team(dex, rng, team_size), random_team(dex, rng, team_size));
  SeededSource luck(rng());
  for (int t = 0; t < turns; ++t) {
    auto a0 = legal_actions(dex, state, 0);
    auto a1 = legal_actions(dex, state, 1);
    auto next = resolve_turn(dex, state, a0[rng() % a0.size()], a1[rng() % a1.size()], luck).state;
    if (next.finished()) break;
    state = next;
  }
  return state;
}

}  // namespace duelist::testing
