#include "duelist/state.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace duelist {

const char* to_string(Category c) {
  switch (c) {
    case Category::Physical: return "physical";
    case Category::Special: return "special";
    case Category::Status: return "status";
  }
  return "?";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::None: return "none";
    case Status::Burn: return "burn";
    case Status::Poison: return "poison";
    case Status::Paralysis: return "paralysis";
  }
  return "?";
}

const char* to_string(Weather w) {
  switch (w) {
    case Weather::None: return "none";
    case Weather::Rain: return "rain";
    case Weather::Sun: return "sun";
  }
  return "?";
}

const char* to_string(Stat s) {
  switch (s) {
    case Stat::Atk: return "atk";
    case Stat::Def: return "def";
    case Stat::Spa: return "spa";
    case Stat::Spd: return "spd";
    case Stat::Spe: return "spe";
  }
  return "?";
}

Category category_from_string(const std::string& s) {
  if (s == "physical") return Category::Physical;
  if (s == "special") return Category::Special;
  if (s == "status") return Category::Status;
  throw std::invalid_argument("unknown category '" + s + "'");
}

Status status_from_string(const std::string& s) {
  if (s == "none") return Status::None;
  if (s == "burn") return Status::Burn;
  if (s == "poison") return Status::Poison;
  if (s == "paralysis") return Status::Paralysis;
  throw std::invalid_argument("unknown status '" + s + "'");
}

Weather weather_from_string(const std::string& s) {
  if (s == "none") return Weather::None;
  if (s == "rain") return Weather::Rain;
  if (s == "sun") return Weather::Sun;
  throw std::invalid_argument("unknown weather '" + s + "'");
}

Stat stat_from_string(const std::string& s) {
  if (s == "atk") return Stat::Atk;
  if (s == "def") return Stat::Def;
  if (s == "spa") return Stat::Spa;
  if (s == "spd") return Stat::Spd;
  if (s == "spe") return Stat::Spe;
  throw std::invalid_argument("unknown stat '" + s + "'");
}

StatBlock compute_stats(const SpeciesDef& species, int level) {
  if (level < 1 || level > 100) {
    throw std::invalid_argument("level " + std::to_string(level) + " outside [1, 100]");
  }
  auto other = [level](int base) { return static_cast<std::uint16_t>(2 * base * level / 100 + 5); };
  StatBlock s;
  s.hp = static_cast<std::uint16_t>(2 * species.base.hp * level / 100 + level + 10);
  s.atk = other(species.base.atk);
  s.def = other(species.base.def);
  s.spa = other(species.base.spa);
  s.spd = other(species.base.spd);
  s.spe = other(species.base.spe);
  return s;
}

int Pokemon::add_stage(Stat s, int delta) {
  auto& st = stages[static_cast<int>(s)];
  int before = st;
  st = static_cast<std::int8_t>(std::clamp(before + delta, -6, 6));
  return st - before;
}

int SideState::alive_count() const {
  int n = 0;
  for (int i = 0; i < team_size; ++i) n += team[i].alive() ? 1 : 0;
  return n;
}

bool SideState::needs_replacement() const {
  if (team[active].alive()) return false;
  for (int i = 0; i < team_size; ++i) {
    if (i != active && team[i].alive()) return true;
  }
  return false;
}

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Move: return "move:" + std::to_string(a.index);
    case Action::Kind::Switch: return "switch:" + std::to_string(a.index);
    case Action::Kind::Pass: return "pass";
  }
  return "?";
}

Action parse_action(const std::string& text) {
  if (text == "pass") return Action::pass();
  auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("malformed action '" + text + "'");
  const std::string kind = text.substr(0, colon);
  int idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed action '" + text + "'");
  }
  if (idx < 0 || idx > 255) throw std::invalid_argument("malformed action '" + text + "'");
  if (kind == "move") return Action::use_move(idx);
  if (kind == "switch") return Action::switch_to(idx);
  throw std::invalid_argument("malformed action '" + text + "'");
}

Pokemon make_pokemon(const Dex& dex, const Build& build) {
  if (auto v = build_violation(dex, build); !v.empty()) throw std::invalid_argument(v);
  const auto& sp = dex.species(build.species);
  Pokemon p;
  p.species = build.species;
  p.level = static_cast<std::uint8_t>(build.level);
  p.stats = compute_stats(sp, build.level);
  p.hp = p.stats.hp;
  p.move_count = static_cast<std::uint8_t>(build.moves.size());
  for (std::size_t i = 0; i < build.moves.size(); ++i) {
    p.moves[i] = {build.moves[i], static_cast<std::uint8_t>(dex.move(build.moves[i]).pp)};
  }
  p.ability = build.ability;
  p.item = build.item;
  return p;
}

SideState make_side(const Dex& dex, const Team& team) {
  if (team.empty() || team.size() > kMaxTeam) {
    throw std::invalid_argument("a team has 1 to 6 members, got " + std::to_string(team.size()));
  }
  SideState side;
  side.team_size = static_cast<std::uint8_t>(team.size());
  for (std::size_t i = 0; i < team.size(); ++i) side.team[i] = make_pokemon(dex, team[i]);
  return side;
}

BattleState make_battle(const Dex& dex, const Team& side0, const Team& side1) {
  BattleState s;
  s.sides[0] = make_side(dex, side0);
  s.sides[1] = make_side(dex, side1);
  return s;
}

Build canonical_build(const Dex& dex, SpeciesId species) {
  const auto& sp = dex.species(species);
  std::vector<MoveId> moves = sp.learnset;
  std::stable_sort(moves.begin(), moves.end(), [&](MoveId a, MoveId b) {
    int pa = dex.move(a).power, pb = dex.move(b).power;
    if (pa != pb) return pa > pb;
    return a < b;
  });
  if (moves.size() > kMaxMoves) moves.resize(kMaxMoves);
  return Build{species, moves, sp.abilities.front(), kNoItem, 100};
}

std::string build_violation(const Dex& dex, const Build& build) {
  if (build.species.value >= dex.species_count()) return "unknown species id " + std::to_string(build.species.value);
  const auto& sp = dex.species(build.species);
  if (build.level < 1 || build.level > 100) return sp.name + ": level outside [1, 100]";
  if (build.moves.empty() || build.moves.size() > kMaxMoves) return sp.name + ": needs one to four moves";
  std::set<MoveId> seen;
  for (auto m : build.moves) {
    if (m.value >= dex.move_count()) return sp.name + ": unknown move id " + std::to_string(m.value);
    if (!sp.can_learn(m)) return sp.name + " cannot learn " + dex.move(m).name;
    if (!seen.insert(m).second) return sp.name + ": duplicate move " + dex.move(m).name;
  }
  if (build.ability.value >= dex.ability_count() || !sp.has_ability(build.ability)) {
    return sp.name + ": ability not in its pool";
  }
  if (build.item != kNoItem && build.item.value >= dex.item_count()) return sp.name + ": unknown item";
  return {};
}

void validate_state(const Dex& dex, const BattleState& state) {
  auto fail = [](const std::string& m) { throw StateError("invalid state: " + m); };
  if (state.turn < 1) fail("turn number must be >= 1");
  if (state.weather == Weather::None && state.weather_turns != 0) fail("weather counter without weather");
  for (int s = 0; s < 2; ++s) {
    const auto& side = state.sides[s];
    const std::string where = "side " + std::to_string(s);
    if (side.team_size < 1 || side.team_size > kMaxTeam) fail(where + ": team size");
    if (side.active >= side.team_size) fail(where + ": active index");
    if (side.toxic_spikes > 2) fail(where + ": toxic spikes layers");
    std::set<SpeciesId> species;
    for (int i = 0; i < side.team_size; ++i) {
      const auto& p = side.team[i];
      const std::string pw = where + " slot " + std::to_string(i);
      if (p.species.value >= dex.species_count()) fail(pw + ": species");
      if (p.hp > p.stats.hp) fail(pw + ": hp above max");
      if (p.move_count < 1 || p.move_count > kMaxMoves) fail(pw + ": move count");
      for (int m = 0; m < p.move_count; ++m) {
        if (p.moves[m].move.value >= dex.move_count()) fail(pw + ": move id");
        if (p.moves[m].pp > dex.move(p.moves[m].move).pp) fail(pw + ": pp above max");
      }
      for (auto st : p.stages) {
        if (st < -6 || st > 6) fail(pw + ": stat stage out of range");
      }
      if (p.ability.value >= dex.ability_count()) fail(pw + ": ability id");
      if (p.item != kNoItem && p.item.value >= dex.item_count()) fail(pw + ": item id");
      if (p.stats != compute_stats(dex.species(p.species), p.level)) fail(pw + ": stats do not match species");
    }
    if (!state.finished() && !side.active_pokemon().alive() && !side.needs_replacement() && side.any_alive()) {
      fail(where + ": fainted active without replacement");
    }
  }
  bool wiped0 = !state.sides[0].any_alive(), wiped1 = !state.sides[1].any_alive();
  if (state.finished() != (wiped0 || wiped1)) fail("winner flag inconsistent with remaining Pokemon");
  if (state.finished() && state.winner > 1) fail("winner index");
  if (state.finished() && !(wiped0 && wiped1) && state.sides[state.winner].any_alive() == false) {
    fail("winner has no Pokemon left");
  }
}

}  // namespace duelist
