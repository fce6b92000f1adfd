#include "duelist/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace duelist {

namespace {

constexpr std::uint16_t kStruggleId = 0xFFFF;

int modified_stat(const Pokemon& p, Stat s) {
  return std::max(1, static_cast<int>(std::floor(p.stats.get(s) * stage_multiplier(p.stage(s)))));
}


bool ability_blocks_type(const Dex& dex, const Pokemon& p, TypeId t) {
  const auto& a = dex.ability(p.ability);
  return a.kind == AbilityKind::TypeImmunity && std::find(a.types.begin(), a.types.end(), t) != a.types.end();
}

bool ability_blocks_status(const Dex& dex, const Pokemon& p, Status s) {
  const auto& a = dex.ability(p.ability);
  return a.kind == AbilityKind::StatusImmunity && a.status == s;
}

struct DamageDetail {
  int amount = 0;
  double effectiveness = 1.0;
  bool pinch_boost = false;
  bool resisted_by_ability = false;
  bool item_boost = false;
};

// Core formula shared by regular moves and the fallback move.
DamageDetail compute_damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, int power,
                            Category category, std::optional<TypeId> move_type, double roll,
                            Weather weather) {
  DamageDetail d;
  const auto& atk_sp = dex.species(attacker.species);
  const auto& def_sp = dex.species(defender.species);
  if (move_type) {
    d.effectiveness = type_effectiveness(dex, *move_type, def_sp);
    if (ability_blocks_type(dex, defender, *move_type)) d.effectiveness = 0.0;
  }
  if (d.effectiveness == 0.0) return d;

  const bool physical = category == Category::Physical;
  long attack = modified_stat(attacker, physical ? Stat::Atk : Stat::Spa);
  const long defense = modified_stat(defender, physical ? Stat::Def : Stat::Spd);
  if (physical && attacker.status == Status::Burn) attack = std::max(1L, attack / 2);

  const long level_factor = 2L * attacker.level / 5 + 2;
  long dmg = level_factor * power * attack / defense / 50 + 2;
  dmg = static_cast<long>(std::floor(static_cast<double>(dmg) * (85.0 + 15.0 * roll) / 100.0));
  if (move_type && atk_sp.has_type(*move_type)) dmg = dmg * 3 / 2;
  dmg = static_cast<long>(std::floor(static_cast<double>(dmg) * d.effectiveness));
  if (move_type && weather != Weather::None) {
    const bool water = dex.water() && *move_type == *dex.water();
    const bool fire = dex.fire() && *move_type == *dex.fire();
    if ((weather == Weather::Rain && water) || (weather == Weather::Sun && fire)) dmg = dmg * 3 / 2;
    if ((weather == Weather::Rain && fire) || (weather == Weather::Sun && water)) dmg = dmg / 2;
  }
  if (move_type) {
    const auto& ab = dex.ability(attacker.ability);
    if (ab.kind == AbilityKind::PinchBoost && ab.types.front() == *move_type &&
        attacker.hp * 3 <= attacker.stats.hp) {
      dmg = dmg * 3 / 2;
      d.pinch_boost = true;
    }
    const auto& dab = dex.ability(defender.ability);
    if (dab.kind == AbilityKind::Resist && std::find(dab.types.begin(), dab.types.end(), *move_type) != dab.types.end()) {
      dmg = dmg / 2;
      d.resisted_by_ability = true;
    }
    if (attacker.has_item()) {
      const auto& it = dex.item(attacker.item);
      if ((it.kind == ItemKind::TypeBoost && it.type == *move_type) ||
          (it.kind == ItemKind::SuperEffectiveBoost && d.effectiveness > 1.0)) {
        dmg = dmg * 6 / 5;
        d.item_boost = true;
      }
    }
  }
  d.amount = static_cast<int>(std::max(1L, dmg));
  return d;
}

class TurnRunner {
 public:
  TurnRunner(const Dex& dex, BattleState& s, RandomSource& rng, EventLog* events)
      : dex_(dex), s_(s), rng_(rng), events_(events) {}

  void emit(EventKind kind, int side, int slot = -1, std::uint16_t id = 0, int amount = 0) {
    if (kind == EventKind::Faint) last_faint_side_ = side;
    if (!events_) return;
    Event e;
    e.kind = kind;
    e.side = static_cast<std::int8_t>(side);
    e.slot = static_cast<std::int8_t>(slot);
    e.id = id;
    e.amount = amount;
    if (slot >= 0 && side >= 0) {
      const auto& p = s_.sides[side].team[slot];
      e.hp_after = p.hp;
      e.max_hp = p.stats.hp;
    }
    events_->push_back(e);
  }

  void switch_in(int side, int target) {
    auto& sd = s_.sides[side];
    sd.active_pokemon().stages = {};
    sd.active = static_cast<std::uint8_t>(target);
    auto& p = sd.active_pokemon();
    emit(EventKind::SwitchIn, side, target, p.species.value);
    if (sd.toxic_spikes > 0 && p.status == Status::None) {
      if (ability_blocks_status(dex_, p, Status::Poison)) {
        emit(EventKind::AbilityActivated, side, target, p.ability.value);
      } else {
        p.status = Status::Poison;
        emit(EventKind::StatusApplied, side, target, static_cast<std::uint16_t>(Status::Poison));
      }
    }
  }

  void apply_damage(int side, int amount) {
    auto& sd = s_.sides[side];
    auto& p = sd.active_pokemon();
    const int dealt = std::min<int>(amount, p.hp);
    p.hp = static_cast<std::uint16_t>(p.hp - dealt);
    emit(EventKind::Damage, side, sd.active, 0, dealt);
    if (!p.alive()) {
      faint(side);
      return;
    }
    if (p.has_item() && dex_.item(p.item).kind == ItemKind::PinchHeal && p.hp * 2 <= p.stats.hp) {
      const int heal = std::min<int>(p.stats.hp / 4, p.stats.hp - p.hp);
      const auto item = p.item;
      p.hp = static_cast<std::uint16_t>(p.hp + heal);
      emit(EventKind::ItemActivated, side, sd.active, item.value, heal);
      p.item = kNoItem;
      emit(EventKind::ItemConsumed, side, sd.active, item.value);
    }
  }

  void faint(int side) {
    auto& sd = s_.sides[side];
    sd.active_pokemon().status = Status::None;
    sd.active_pokemon().stages = {};
    emit(EventKind::Faint, side, sd.active);
  }

  void inflict_status(int side, Status status) {
    auto& sd = s_.sides[side];
    auto& p = sd.active_pokemon();
    if (!p.alive() || p.status != Status::None) return;
    if (ability_blocks_status(dex_, p, status)) {
      emit(EventKind::AbilityActivated, side, sd.active, p.ability.value);
      return;
    }
    p.status = status;
    emit(EventKind::StatusApplied, side, sd.active, static_cast<std::uint16_t>(status));
  }

  void apply_effect(int side, const MoveDef& move, bool status_move) {
    const auto& fx = move.effect;
    const int foe = 1 - side;
    const int impacted = fx.target == EffectTarget::Self ? side : foe;
    if (fx.target == EffectTarget::Foe && !s_.sides[foe].active_pokemon().alive()) return;
    if (!status_move && fx.chance < 1.0 && rng_.draw(impacted) >= fx.chance) return;
    if (status_move && fx.chance < 1.0 && rng_.draw(impacted) >= fx.chance) return;
    switch (fx.kind) {
      case EffectKind::None:
        break;
      case EffectKind::Boost: {
        auto& sd = s_.sides[impacted];
        for (int st = 0; st < kStageStats; ++st) {
          if (fx.stage_changes[st] == 0) continue;
          int applied = sd.active_pokemon().add_stage(static_cast<Stat>(st), fx.stage_changes[st]);
          if (applied != 0) emit(EventKind::StatChange, impacted, sd.active, static_cast<std::uint16_t>(st), applied);
        }
        break;
      }
      case EffectKind::InflictStatus:
        inflict_status(foe, fx.status);
        break;
      case EffectKind::Heal: {
        auto& sd = s_.sides[side];
        auto& p = sd.active_pokemon();
        const int amount = std::min<int>(static_cast<int>(p.stats.hp * fx.heal_fraction), p.stats.hp - p.hp);
        if (amount > 0) {
          p.hp = static_cast<std::uint16_t>(p.hp + amount);
          emit(EventKind::Heal, side, sd.active, 0, amount);
        }
        break;
      }
      case EffectKind::SetWeather:
        s_.weather = fx.weather;
        s_.weather_turns = kWeatherTurns;
        emit(EventKind::WeatherStart, -1, -1, static_cast<std::uint16_t>(fx.weather));
        break;
      case EffectKind::SetSideCondition:
        if (fx.condition == SideCondition::Tailwind) {
          s_.sides[side].tailwind_turns = kTailwindTurns;
          emit(EventKind::ConditionStart, side, -1, static_cast<std::uint16_t>(SideCondition::Tailwind));
        } else if (s_.sides[foe].toxic_spikes < kMaxToxicSpikes) {
          ++s_.sides[foe].toxic_spikes;
          emit(EventKind::ConditionStart, foe, -1, static_cast<std::uint16_t>(SideCondition::ToxicSpikes),
               s_.sides[foe].toxic_spikes);
        }
        break;
    }
  }

  void use_move(int side, int slot) {
    auto& sd = s_.sides[side];
    auto& user = sd.active_pokemon();
    if (!user.alive()) return;
    const int foe = 1 - side;
    if (user.status == Status::Paralysis && rng_.draw(side) < kParalysisSkipChance) {
      emit(EventKind::FullyParalyzed, side, sd.active);
      return;
    }
    if (slot == kStruggleSlot) {
      emit(EventKind::UseMove, side, sd.active, kStruggleId);
      auto& target = s_.sides[foe].active_pokemon();
      if (!target.alive()) return;
      const double roll = rng_.draw(foe);
      apply_damage(foe, struggle_damage(dex_, user, target, roll));
      return;
    }
    auto& ms = user.moves[slot];
    const MoveDef& move = dex_.move(ms.move);
    ms.pp = static_cast<std::uint8_t>(ms.pp - 1);
    emit(EventKind::UseMove, side, sd.active, ms.move.value);

    const bool status_move = move.category == Category::Status;
    const bool targets_foe = !status_move || move.effect.target == EffectTarget::Foe;
    if (targets_foe) {
      auto& target = s_.sides[foe].active_pokemon();
      if (!target.alive()) return;
      if (move.accuracy < 1.0 && rng_.draw(foe) >= move.accuracy) {
        emit(EventKind::Miss, side, sd.active);
        return;
      }
    }
    if (!status_move) {
      auto& target = s_.sides[foe].active_pokemon();
      if (ability_blocks_type(dex_, target, move.type)) {
        emit(EventKind::AbilityActivated, foe, s_.sides[foe].active, target.ability.value);
        emit(EventKind::Immune, foe, s_.sides[foe].active);
        return;
      }
      if (type_effectiveness(dex_, move.type, dex_.species(target.species)) == 0.0) {
        emit(EventKind::Immune, foe, s_.sides[foe].active);
        return;
      }
      const double roll = rng_.draw(foe);
      const DamageDetail d = compute_damage(dex_, user, target, move.power, move.category, move.type, roll, s_.weather);
      if (d.pinch_boost) emit(EventKind::AbilityActivated, side, sd.active, user.ability.value);
      if (d.item_boost) emit(EventKind::ItemActivated, side, sd.active, user.item.value);
      if (d.resisted_by_ability) {
        emit(EventKind::AbilityActivated, foe, s_.sides[foe].active, target.ability.value);
      }
      apply_damage(foe, d.amount);
    }
    if (move.effect.kind != EffectKind::None) apply_effect(side, move, status_move);
  }

  void end_of_turn() {
    for (int side = 0; side < 2; ++side) {
      auto& sd = s_.sides[side];
      auto& p = sd.active_pokemon();
      if (!p.alive()) continue;
      if (p.status == Status::Burn || p.status == Status::Poison) {
        const int frac = p.status == Status::Burn ? 16 : 8;
        const int chip = std::min<int>(std::max(1, p.stats.hp / frac), p.hp);
        p.hp = static_cast<std::uint16_t>(p.hp - chip);
        emit(EventKind::Residual, side, sd.active, static_cast<std::uint16_t>(p.status), chip);
        if (!p.alive()) {
          faint(side);
          continue;
        }
      }
      if (p.has_item() && dex_.item(p.item).kind == ItemKind::Leftovers && p.hp < p.stats.hp) {
        const int heal = std::min<int>(std::max(1, p.stats.hp / 16), p.stats.hp - p.hp);
        p.hp = static_cast<std::uint16_t>(p.hp + heal);
        emit(EventKind::ItemActivated, side, sd.active, p.item.value, heal);
      }
    }
    if (s_.weather != Weather::None && --s_.weather_turns == 0) {
      emit(EventKind::WeatherEnd, -1, -1, static_cast<std::uint16_t>(s_.weather));
      s_.weather = Weather::None;
    }
    for (int side = 0; side < 2; ++side) {
      auto& sd = s_.sides[side];
      if (sd.tailwind_turns > 0 && --sd.tailwind_turns == 0) {
        emit(EventKind::ConditionEnd, side, -1, static_cast<std::uint16_t>(SideCondition::Tailwind));
      }
    }
    ++s_.turn;
  }

  void settle_winner() {
    const bool wiped0 = !s_.sides[0].any_alive();
    const bool wiped1 = !s_.sides[1].any_alive();
    if (!wiped0 && !wiped1) return;
    int w;
    if (wiped0 && wiped1) {
      w = last_faint_side_ >= 0 ? last_faint_side_ : 0;
    } else {
      w = wiped0 ? 1 : 0;
    }
    s_.winner = static_cast<std::int8_t>(w);
    emit(EventKind::Win, w);
  }

  int move_priority(int side, const Action& a) const {
    if (a.is_struggle()) return 0;
    const auto& p = s_.sides[side].active_pokemon();
    return dex_.move(p.moves[a.index].move).priority;
  }

  void run(const Action& a0, const Action& a1, bool replacement_step) {
    const Action acts[2] = {a0, a1};
    for (int side = 0; side < 2; ++side) {
      if (acts[side].is_switch()) switch_in(side, acts[side].index);
    }
    if (!replacement_step) {
      int order[2] = {0, 1};
      int movers = 0;
      if (acts[0].is_move() && acts[1].is_move()) {
        movers = 2;
        const int p0 = move_priority(0, acts[0]), p1 = move_priority(1, acts[1]);
        bool side0_first;
        if (p0 != p1) {
          side0_first = p0 > p1;
        } else {
          const double s0 = effective_speed(dex_, s_, 0), s1 = effective_speed(dex_, s_, 1);
          if (s0 != s1) {
            side0_first = s0 > s1;
          } else {
            side0_first = rng_.draw(0) < 0.5;
          }
        }
        if (!side0_first) std::swap(order[0], order[1]);
      } else if (acts[0].is_move()) {
        movers = 1;
      } else if (acts[1].is_move()) {
        movers = 1;
        order[0] = 1;
      }
      for (int i = 0; i < movers; ++i) use_move(order[i], acts[order[i]].index);
      end_of_turn();
    }
    settle_winner();
  }

 private:
  const Dex& dex_;
  BattleState& s_;
  RandomSource& rng_;
  EventLog* events_;
  int last_faint_side_ = -1;
};

}  // namespace

double stage_multiplier(int stage) {
  return stage >= 0 ? (2.0 + stage) / 2.0 : 2.0 / (2.0 - stage);
}

double effective_speed(const Dex& dex, const BattleState& state, int side) {
  const auto& sd = state.sides[side];
  const auto& p = sd.active_pokemon();
  double speed = std::floor(p.stats.spe * stage_multiplier(p.stage(Stat::Spe)));
  if (p.status == Status::Paralysis) speed *= 0.5;
  if (sd.tailwind_turns > 0) speed *= 2.0;
  const auto& ab = dex.ability(p.ability);
  if (ab.kind == AbilityKind::WeatherSpeed && state.weather != Weather::None && ab.weather == state.weather) {
    speed *= 2.0;
  }
  return speed;
}

double type_effectiveness(const Dex& dex, TypeId move_type, const SpeciesDef& defender) {
  double eff = 1.0;
  for (auto t : defender.types) eff *= dex.chart().at(move_type, t);
  return eff;
}

int damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, const MoveDef& move, double roll,
           const BattleState& ctx) {
  if (move.category == Category::Status) throw std::invalid_argument("status moves deal no damage");
  return compute_damage(dex, attacker, defender, move.power, move.category, move.type, roll, ctx.weather).amount;
}

int struggle_damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, double roll) {
  return compute_damage(dex, attacker, defender, kStrugglePower, Category::Physical, std::nullopt, roll,
                        Weather::None)
      .amount;
}

std::vector<Action> legal_actions(const Dex& dex, const BattleState& state, int side) {
  (void)dex;
  if (state.finished()) throw StateError("legal_actions: battle is finished");
  std::vector<Action> out;
  const auto& sd = state.sides[side];
  auto add_switches = [&] {
    for (int i = 0; i < sd.team_size; ++i) {
      if (i != sd.active && sd.team[i].alive()) out.push_back(Action::switch_to(i));
    }
  };
  if (state.replacement_pending()) {
    if (sd.needs_replacement()) {
      add_switches();
    } else {
      out.push_back(Action::pass());
    }
    return out;
  }
  const auto& p = sd.active_pokemon();
  for (int m = 0; m < p.move_count; ++m) {
    if (p.moves[m].pp > 0) out.push_back(Action::use_move(m));
  }
  if (out.empty()) out.push_back(Action::use_move(kStruggleSlot));
  add_switches();
  return out;
}

bool is_legal(const Dex& dex, const BattleState& state, int side, const Action& action) {
  if (state.finished()) return false;
  const auto& sd = state.sides[side];
  const bool replacing = state.replacement_pending();
  switch (action.kind) {
    case Action::Kind::Pass:
      return replacing && !sd.needs_replacement();
    case Action::Kind::Switch:
      if (replacing && !sd.needs_replacement()) return false;
      return action.index < sd.team_size && action.index != sd.active && sd.team[action.index].alive();
    case Action::Kind::Move: {
      if (replacing) return false;
      const auto& p = sd.active_pokemon();
      if (action.index == kStruggleSlot) {
        for (int m = 0; m < p.move_count; ++m) {
          if (p.moves[m].pp > 0) return false;
        }
        return true;
      }
      (void)dex;
      return action.index < p.move_count && p.moves[action.index].pp > 0;
    }
  }
  return false;
}

void resolve_turn_into(const Dex& dex, const BattleState& state, const Action& action0, const Action& action1,
                       RandomSource& rng, BattleState& out, EventLog* events) {
  if (state.finished()) throw StateError("resolve_turn: battle is finished");
  if (!is_legal(dex, state, 0, action0)) {
    throw std::invalid_argument("illegal action for side 0: " + to_string(action0));
  }
  if (!is_legal(dex, state, 1, action1)) {
    throw std::invalid_argument("illegal action for side 1: " + to_string(action1));
  }
  const bool replacement_step = state.replacement_pending();
  out = state;
  if (events) events->clear();
  TurnRunner runner(dex, out, rng, events);
  runner.run(action0, action1, replacement_step);
}

TurnResult resolve_turn(const Dex& dex, const BattleState& state, const Action& action0, const Action& action1,
                        RandomSource& rng) {
  TurnResult r;
  resolve_turn_into(dex, state, action0, action1, rng, r.state, &r.events);
  return r;
}

std::optional<int> winner(const BattleState& state) { return state.winner_side(); }

}  // namespace duelist
