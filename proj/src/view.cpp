#include "duelist/view.hpp"

#include <cmath>

#include "duelist/engine.hpp"

namespace duelist {

using nlohmann::json;

namespace {

constexpr std::uint16_t kStruggleId = 0xFFFF;

void reveal_move(Revealed& r, MoveId m) {
  for (auto& [id, uses] : r.moves) {
    if (id == m) {
      ++uses;
      return;
    }
  }
  r.moves.emplace_back(m, 1);
}

bool carries_hp(EventKind k) {
  return k == EventKind::Damage || k == EventKind::Heal || k == EventKind::Residual || k == EventKind::ItemActivated;
}

}  // namespace

RevealLedger::RevealLedger(const BattleState& initial) {
  for (int s = 0; s < 2; ++s) revealed_[s][initial.sides[s].active].seen = true;
}

void RevealLedger::record(const EventLog& events) {
  for (const auto& e : events) {
    if (e.side < 0 || e.side > 1 || e.slot < 0 || e.slot >= kMaxTeam) continue;
    auto& r = revealed_[e.side][e.slot];
    switch (e.kind) {
      case EventKind::SwitchIn: r.seen = true; break;
      case EventKind::UseMove:
        if (e.id != kStruggleId) reveal_move(r, MoveId{e.id});
        break;
      case EventKind::AbilityActivated: r.ability = AbilityId{e.id}; break;
      case EventKind::ItemActivated: r.item = ItemId{e.id}; break;
      case EventKind::ItemConsumed:
        r.item = ItemId{e.id};
        r.item_consumed = true;
        break;
      default: break;
    }
  }
}

int hp_percent(int hp, int max_hp) {
  if (hp <= 0 || max_hp <= 0) return 0;
  const int p = static_cast<int>(std::lround(100.0 * hp / max_hp));
  return std::clamp(p, 1, 100);
}

SideView view_for_side(const Dex& dex, const BattleState& state, int side, const RevealLedger& ledger) {
  const int opp = 1 - side;
  SideView v;
  v.side = side;
  v.turn = state.turn;
  v.weather = state.weather;
  v.weather_turns = state.weather_turns;
  v.own = state.sides[side];
  const auto& theirs = state.sides[opp];
  v.opp_team_size = theirs.team_size;
  v.opp_active = theirs.active;
  v.opp_tailwind_turns = theirs.tailwind_turns;
  v.opp_toxic_spikes = theirs.toxic_spikes;
  v.opp_stages = theirs.active_pokemon().stages;
  for (int i = 0; i < theirs.team_size; ++i) {
    const auto& r = ledger.slot(opp, i);
    OpponentSlotView o;
    if (r.seen) {
      const auto& p = theirs.team[i];
      o.seen = true;
      o.species = p.species;
      o.level = p.level;
      o.hp_percent = hp_percent(p.hp, p.stats.hp);
      o.status = p.status;
      o.moves = r.moves;
      o.ability = r.ability;
      o.item = r.item;
      o.item_consumed = r.item_consumed;
    }
    v.opp.push_back(std::move(o));
  }
  if (state.finished()) {
    v.winner = state.winner;
    return v;
  }
  const bool pending = state.replacement_pending();
  if (!pending || state.sides[side].needs_replacement()) {
    v.request = pending ? RequestKind::Replacement : RequestKind::Move;
    v.legal = legal_actions(dex, state, side);
  }
  return v;
}

EventLog events_for_side(const EventLog& events, int side) {
  EventLog out = events;
  for (auto& e : out) {
    if (e.side != 1 - side || e.slot < 0) continue;
    if (carries_hp(e.kind)) e.amount = e.max_hp > 0 ? static_cast<std::int32_t>(std::lround(100.0 * e.amount / e.max_hp)) : 0;
    e.hp_after = static_cast<std::uint16_t>(hp_percent(e.hp_after, e.max_hp));
    e.max_hp = e.max_hp > 0 ? 100 : 0;
  }
  return out;
}

json to_json(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Move: return {{"kind", "move"}, {"index", a.index}};
    case Action::Kind::Switch: return {{"kind", "switch"}, {"index", a.index}};
    case Action::Kind::Pass: return {{"kind", "pass"}};
  }
  return nullptr;
}

json to_json(const Dex& dex, const Pokemon& p) {
  json moves = json::array();
  for (int m = 0; m < p.move_count; ++m) {
    const auto& def = dex.move(p.moves[m].move);
    moves.push_back({{"name", def.name}, {"pp", p.moves[m].pp}, {"max-pp", def.pp}});
  }
  return {{"species", dex.species(p.species).name},
          {"level", p.level},
          {"hp", p.hp},
          {"max-hp", p.stats.hp},
          {"stats",
           {{"atk", p.stats.atk}, {"def", p.stats.def}, {"spa", p.stats.spa}, {"spd", p.stats.spd}, {"spe", p.stats.spe}}},
          {"moves", moves},
          {"ability", dex.ability(p.ability).name},
          {"item", p.has_item() ? json(dex.item(p.item).name) : json(nullptr)},
          {"status", to_string(p.status)},
          {"stages", p.stages}};
}

json to_json(const Dex& dex, const Event& e) {
  json j = {{"kind", to_string(e.kind)}, {"side", e.side}};
  if (e.slot >= 0) j["slot"] = e.slot;
  switch (e.kind) {
    case EventKind::SwitchIn: j["species"] = dex.species(SpeciesId{e.id}).name; break;
    case EventKind::UseMove: j["move"] = e.id == kStruggleId ? "struggle" : dex.move(MoveId{e.id}).name; break;
    case EventKind::StatusApplied:
    case EventKind::Residual: j["status"] = to_string(static_cast<Status>(e.id)); break;
    case EventKind::StatChange: j["stat"] = to_string(static_cast<Stat>(e.id)); break;
    case EventKind::WeatherStart:
    case EventKind::WeatherEnd: j["weather"] = to_string(static_cast<Weather>(e.id)); break;
    case EventKind::ConditionStart:
    case EventKind::ConditionEnd: j["condition"] = e.id == 0 ? "tailwind" : "toxic-spikes"; break;
    case EventKind::ItemActivated:
    case EventKind::ItemConsumed: j["item"] = dex.item(ItemId{e.id}).name; break;
    case EventKind::AbilityActivated: j["ability"] = dex.ability(AbilityId{e.id}).name; break;
    default: break;
  }
  if (e.kind == EventKind::StatChange || carries_hp(e.kind)) j["amount"] = e.amount;
  if (e.slot >= 0 && e.max_hp > 0) {
    j["hp"] = e.hp_after;
    j["max-hp"] = e.max_hp;
  }
  return j;
}

json to_json(const Dex& dex, const SideView& v) {
  json own = json::array();
  for (int i = 0; i < v.own.team_size; ++i) own.push_back(to_json(dex, v.own.team[i]));
  json opp = json::array();
  for (const auto& o : v.opp) {
    if (!o.seen) {
      opp.push_back({{"seen", false}});
      continue;
    }
    json moves = json::array();
    for (const auto& [m, uses] : o.moves) moves.push_back({{"name", dex.move(m).name}, {"uses", uses}});
    json slot = {{"seen", true},
                 {"species", dex.species(o.species).name},
                 {"level", o.level},
                 {"hp-percent", o.hp_percent},
                 {"status", to_string(o.status)},
                 {"moves", moves}};
    slot["ability"] = o.ability ? json(dex.ability(*o.ability).name) : json(nullptr);
    slot["item"] = o.item ? json(dex.item(*o.item).name) : json(nullptr);
    slot["item-consumed"] = o.item_consumed;
    opp.push_back(std::move(slot));
  }
  json legal = json::array();
  for (const auto& a : v.legal) legal.push_back(to_json(a));
  const char* request = v.request == RequestKind::Move ? "move" : v.request == RequestKind::Replacement ? "replacement" : "wait";
  json j = {{"side", v.side},
            {"turn", v.turn},
            {"weather", to_string(v.weather)},
            {"weather-turns", v.weather_turns},
            {"own",
             {{"team", own},
              {"active", v.own.active},
              {"tailwind-turns", v.own.tailwind_turns},
              {"toxic-spikes", v.own.toxic_spikes}}},
            {"opponent",
             {{"team-size", v.opp_team_size},
              {"active", v.opp_active},
              {"tailwind-turns", v.opp_tailwind_turns},
              {"toxic-spikes", v.opp_toxic_spikes},
              {"stages", v.opp_stages},
              {"team", opp}}},
            {"request", request},
            {"legal", legal}};
  if (v.winner) j["winner"] = *v.winner;
  return j;
}

}  // namespace duelist
