#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "duelist/engine.hpp"
#include "duelist/team.hpp"
#include "support.hpp"

namespace duelist {
namespace {

using testing::build;
using testing::dex24;
using testing::mini_dex;

TEST(DexLoading, SampleDexHas24Species) {
  EXPECT_EQ(dex24().species_count(), 24u);
  EXPECT_EQ(testing::dex64().species_count(), 64u);
  EXPECT_EQ(dex24().content_hash().size(), 16u);
}

TEST(DexLoading, EmptySpeciesListIsRejected) {
  const char* text = R"({"types":["a"],"chart":[[1]],"moves":[],"species":[]})";
  try {
    load_dex_text(text, nullptr, "inline");
    FAIL() << "expected a load error";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("empty dex"), std::string::npos) << e.what();
  }
}

TEST(DexLoading, DanglingLearnsetNamesSpecies) {
  const char* text = R"({"types":["a"],"chart":[[1]],
    "moves":[{"name":"hit","type":"a","category":"physical","power":40,"accuracy":1,"pp":5,"priority":0}],
    "species":[{"name":"Blob","types":["a"],"base":{"hp":1,"atk":1,"def":1,"spa":1,"spd":1,"spe":1},
                "learnset":["hit","kick"]}]})";
  try {
    load_dex_text(text, nullptr, "inline");
    FAIL() << "expected a load error";
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Blob"), std::string::npos) << msg;
    EXPECT_NE(msg.find("kick"), std::string::npos) << msg;
  }
}

TEST(DexLoading, ChartCellsAreValidated) {
  const char* text = R"({"types":["a"],"chart":[[3]],"moves":[],"species":[]})";
  EXPECT_THROW(load_dex_text(text, nullptr, "inline"), LoadError);
}

TEST(Stats, HandComputedValues) {
  SpeciesDef sp;
  sp.base = {100, 50, 0, 0, 0, 0};
  auto s = compute_stats(sp, 100);
  EXPECT_EQ(s.hp, 310);
  EXPECT_EQ(s.atk, 105);
  EXPECT_EQ(compute_stats(sp, 1).def, 5);
  EXPECT_THROW(compute_stats(sp, 0), std::invalid_argument);
  EXPECT_THROW(compute_stats(sp, 101), std::invalid_argument);
}

TEST(Damage, StepByStepExample) {
  const auto& dex = mini_dex();
  auto water = make_pokemon(dex, build(dex, "Puddle", {"splash"}));
  auto fire = make_pokemon(dex, build(dex, "Cinder", {"flame"}));
  ASSERT_EQ(water.stats.spa, 205);
  ASSERT_EQ(fire.stats.spd, 205);
  BattleState ctx;
  // 69 after base, 69 after roll 1.0, 103 after STAB, 206 after x2.
  EXPECT_EQ(damage(dex, water, fire, dex.move(*dex.find_move("splash")), 1.0, ctx), 206);
}

TEST(Damage, ResistedAndImmune) {
  const auto& dex = mini_dex();
  auto water = make_pokemon(dex, build(dex, "Puddle", {"splash"}));
  auto fire = make_pokemon(dex, build(dex, "Cinder", {"flame"}));
  auto ghost = make_pokemon(dex, build(dex, "Shade", {"wisp"}));
  BattleState ctx;
  // 69 -> 69 -> 103 -> 51 (halved)
  EXPECT_EQ(damage(dex, fire, water, dex.move(*dex.find_move("flame")), 1.0, ctx), 51);
  EXPECT_EQ(damage(dex, fire, ghost, dex.move(*dex.find_move("wisp")), 1.0, ctx), 0);
}

TEST(Damage, WeatherAndRoll) {
  const auto& dex = mini_dex();
  auto water = make_pokemon(dex, build(dex, "Puddle", {"splash"}));
  auto fire = make_pokemon(dex, build(dex, "Cinder", {"flame"}));
  BattleState ctx;
  ctx.weather = Weather::Rain;
  ctx.weather_turns = 3;
  EXPECT_EQ(damage(dex, water, fire, dex.move(*dex.find_move("splash")), 1.0, ctx), 309);
  ctx.weather = Weather::None;
  // floor(69 * 0.925) = 63 -> 94 -> 188
  EXPECT_EQ(damage(dex, water, fire, dex.move(*dex.find_move("splash")), 0.5, ctx), 188);
}

TEST(Damage, AtLeastOneWhenNotImmune) {
  const auto& dex = mini_dex();
  auto weak = make_pokemon(dex, build(dex, "Shade", {"poke"}));
  auto tank = make_pokemon(dex, build(dex, "Puddle", {"splash"}));
  tank.stages[static_cast<int>(Stat::Def)] = 6;
  weak.stages[static_cast<int>(Stat::Atk)] = -6;
  EXPECT_EQ(damage(dex, weak, tank, dex.move(*dex.find_move("poke")), 0.0, BattleState{}), 1);
}

TEST(Damage, BurnHalvesPhysicalAttack) {
  const auto& dex = mini_dex();
  auto a = make_pokemon(dex, build(dex, "Cinder", {"flame"}));
  auto d = make_pokemon(dex, build(dex, "Shade", {"poke"}));
  const auto& flame = dex.move(*dex.find_move("flame"));
  int healthy = damage(dex, a, d, flame, 1.0, BattleState{});
  a.status = Status::Burn;
  int burned = damage(dex, a, d, flame, 1.0, BattleState{});
  EXPECT_LT(burned, healthy);
}

Team six_member_team(const Dex& dex) {
  std::mt19937_64 rng(11);
  Team t = random_team(dex, rng, 6);
  for (auto& b : t) {
    std::vector<MoveId> ls = dex.species(b.species).learnset;
    ls.resize(4);
    b.moves = ls;
  }
  return t;
}

TEST(LegalActions, FourMovesAndFiveBenchGiveNine) {
  const auto& dex = dex24();
  auto s = make_battle(dex, six_member_team(dex), six_member_team(dex));
  auto acts = legal_actions(dex, s, 0);
  EXPECT_EQ(acts.size(), 9u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(acts[i], Action::use_move(i));
  for (int i = 4; i < 9; ++i) EXPECT_EQ(acts[i], Action::switch_to(i - 3));
}

TEST(LegalActions, FaintedActiveOnlySwitches) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"}), build(dex, "Puddle", {"splash"})},
                       {build(dex, "Shade", {"wisp"})});
  s.sides[0].team[0].hp = 0;
  auto acts = legal_actions(dex, s, 0);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0], Action::switch_to(1));
  auto other = legal_actions(dex, s, 1);
  ASSERT_EQ(other.size(), 1u);
  EXPECT_EQ(other[0], Action::pass());
}

TEST(LegalActions, NoPpFallsBackToStruggle) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame", "jab"})}, {build(dex, "Shade", {"wisp"})});
  for (auto& m : s.sides[0].team[0].moves) m.pp = 0;
  auto acts = legal_actions(dex, s, 0);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_TRUE(acts[0].is_struggle());
}

TEST(LegalActions, FinishedBattleIsAStateError) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Shade", {"wisp"})});
  s.sides[1].team[0].hp = 0;
  s.winner = 0;
  EXPECT_THROW(legal_actions(dex, s, 0), StateError);
}

TEST(ResolveTurn, SwitchHappensBeforeTheHit) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"}), build(dex, "Puddle", {"splash"})},
                       {build(dex, "Cinder", {"flame"})});
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::switch_to(1), Action::use_move(0), avg);
  EXPECT_EQ(r.state.sides[0].active, 1);
  EXPECT_LT(r.state.sides[0].team[1].hp, r.state.sides[0].team[1].stats.hp);
  EXPECT_EQ(r.state.sides[0].team[0].hp, r.state.sides[0].team[0].stats.hp);
  auto sw = std::find_if(r.events.begin(), r.events.end(), [](auto& e) { return e.kind == EventKind::SwitchIn; });
  auto mv = std::find_if(r.events.begin(), r.events.end(), [](auto& e) { return e.kind == EventKind::UseMove; });
  ASSERT_NE(sw, r.events.end());
  ASSERT_NE(mv, r.events.end());
  EXPECT_LT(sw - r.events.begin(), mv - r.events.begin());
}

TEST(ResolveTurn, IllegalActionNamesSide) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Shade", {"wisp"})});
  auto avg = average_luck_source();
  try {
    resolve_turn(dex, s, Action::use_move(0), Action::switch_to(3), avg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("side 1"), std::string::npos);
  }
}

TEST(ResolveTurn, DoubleFaintWithBenchesLeavesNoWinner) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"}), build(dex, "Shade", {"poke"})},
                       {build(dex, "Puddle", {"splash"}), build(dex, "Shade", {"poke"})});
  // Cinder moves first and leaves Puddle at 13, Puddle's hit faints
  // Cinder, then poison finishes Puddle at end of turn.
  s.sides[0].team[0].hp = 50;
  s.sides[1].team[0].hp = 60;
  s.sides[1].team[0].status = Status::Poison;
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  EXPECT_FALSE(r.state.sides[0].team[0].alive());
  EXPECT_FALSE(r.state.sides[1].team[0].alive());
  EXPECT_FALSE(r.state.finished());
  EXPECT_TRUE(r.state.replacement_pending());
  EXPECT_EQ(legal_actions(dex, r.state, 0), std::vector<Action>{Action::switch_to(1)});
  EXPECT_EQ(legal_actions(dex, r.state, 1), std::vector<Action>{Action::switch_to(1)});
  auto r2 = resolve_turn(dex, r.state, Action::switch_to(1), Action::switch_to(1), avg);
  EXPECT_EQ(r2.state.turn, r.state.turn);
  EXPECT_FALSE(r2.state.replacement_pending());
}

TEST(ResolveTurn, SimultaneousWipeGoesToLastFainter) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Puddle", {"splash"})});
  s.sides[0].team[0].hp = 50;
  s.sides[1].team[0].hp = 60;
  s.sides[1].team[0].status = Status::Poison;
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  // Cinder faints to the hit first, Puddle faints to poison afterwards.
  ASSERT_TRUE(r.state.finished());
  EXPECT_EQ(winner(r.state), 1);
}

TEST(ResolveTurn, WinnerWhenOpponentWiped) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Puddle", {"splash"})}, {build(dex, "Cinder", {"flame"})});
  EXPECT_FALSE(winner(s).has_value());
  s.sides[1].team[0].hp = 5;
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  EXPECT_EQ(winner(r.state), 0);
}

TEST(ResolveTurn, ParalysisHalvesSpeedInOrdering) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"poke"})}, {build(dex, "Puddle", {"poke"})});
  auto first_mover = [&](const BattleState& st) {
    FixedPairSource rng(0.9, 0.9);
    auto r = resolve_turn(dex, st, Action::use_move(0), Action::use_move(0), rng);
    for (auto& e : r.events) {
      if (e.kind == EventKind::UseMove) return int(e.side);
    }
    return -1;
  };
  EXPECT_EQ(first_mover(s), 0);
  EXPECT_EQ(effective_speed(dex, s, 0), 205.0);
  s.sides[0].team[0].status = Status::Paralysis;
  EXPECT_EQ(effective_speed(dex, s, 0), 102.5);
  EXPECT_EQ(first_mover(s), 1);
}

TEST(ResolveTurn, PriorityBeatsSpeed) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Puddle", {"poke"})}, {build(dex, "Shade", {"jab"})});
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  auto mv = std::find_if(r.events.begin(), r.events.end(), [](auto& e) { return e.kind == EventKind::UseMove; });
  EXPECT_EQ(mv->side, 1);
  EXPECT_EQ(r.state.sides[1].team[0].moves[0].pp, 0);
}

TEST(ResolveTurn, AccuracyUsesDefenderNumber) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Shade", {"wisp"})}, {build(dex, "Cinder", {"poke"})});
  FixedPairSource hit(0.9, 0.1), miss(0.1, 0.9);
  auto r1 = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), hit);
  EXPECT_LT(r1.state.sides[1].team[0].hp, s.sides[1].team[0].hp);
  auto r2 = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), miss);
  EXPECT_EQ(r2.state.sides[1].team[0].hp, s.sides[1].team[0].hp);
}

TEST(ResolveTurn, ResidualAndCounters) {
  const auto& dex = dex24();
  auto s = make_battle(dex, {build(dex, "Plainfox", {"tackle"})}, {build(dex, "Plainfox", {"tackle"})});
  auto& p = s.sides[0].team[0];
  p.status = Status::Burn;
  s.weather = Weather::Rain;
  s.weather_turns = 1;
  s.sides[1].tailwind_turns = 1;
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  EXPECT_EQ(r.state.weather, Weather::None);
  EXPECT_EQ(r.state.sides[1].tailwind_turns, 0);
  EXPECT_EQ(r.state.turn, 2);
  bool saw_burn = false;
  for (auto& e : r.events) {
    if (e.kind == EventKind::Residual && e.side == 0) {
      saw_burn = true;
      EXPECT_EQ(e.amount, p.stats.hp / 16);
    }
  }
  EXPECT_TRUE(saw_burn);
}

TEST(ResolveTurn, ToxicSpikesPoisonOnEntry) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"poke"}), build(dex, "Puddle", {"poke"})},
                       {build(dex, "Shade", {"poke"})});
  s.sides[0].toxic_spikes = 1;
  auto avg = average_luck_source();
  auto r = resolve_turn(dex, s, Action::switch_to(1), Action::use_move(0), avg);
  EXPECT_EQ(r.state.sides[0].team[1].status, Status::Poison);
}

// Property sweep over random battles: determinism, hp bounds, stage bounds,
// switch-before-move ordering and legal-action soundness.
TEST(EngineProperties, RandomTurnsAreDeterministicAndSound) {
  const auto& dex = dex24();
  std::mt19937_64 rng(2024);
  int turns = 0;
  std::uint64_t seed = 1;
  while (turns < 100000) {
    auto s = make_battle(dex, random_team(dex, rng, 3), random_team(dex, rng, 3));
    while (!s.finished() && s.turn < 200) {
      auto a0 = legal_actions(dex, s, 0);
      auto a1 = legal_actions(dex, s, 1);
      const auto& x = a0[rng() % a0.size()];
      const auto& y = a1[rng() % a1.size()];
      SeededSource r1(seed), r2(seed);
      ++seed;
      auto t1 = resolve_turn(dex, s, x, y, r1);
      auto t2 = resolve_turn(dex, s, x, y, r2);
      ASSERT_EQ(t1.state, t2.state);
      ASSERT_EQ(t1.events, t2.events);
      for (int side = 0; side < 2; ++side) {
        for (int i = 0; i < t1.state.sides[side].team_size; ++i) {
          const auto& p = t1.state.sides[side].team[i];
          ASSERT_LE(p.hp, p.stats.hp);
          for (auto st : p.stages) ASSERT_TRUE(st >= -6 && st <= 6);
        }
      }
      if (x.is_switch() != y.is_switch()) {
        auto sw = std::find_if(t1.events.begin(), t1.events.end(),
                               [](auto& e) { return e.kind == EventKind::SwitchIn; });
        auto mv = std::find_if(t1.events.begin(), t1.events.end(),
                               [](auto& e) { return e.kind == EventKind::UseMove; });
        if (mv != t1.events.end()) ASSERT_LT(sw, mv);
      }
      if (turns % 97 == 0) {
        // Every action outside the legal set is rejected.
        for (int side = 0; side < 2; ++side) {
          const auto& legal = side == 0 ? a0 : a1;
          std::vector<Action> universe{Action::pass()};
          for (int i = 0; i <= kMaxMoves; ++i) universe.push_back(Action::use_move(i));
          for (int i = 0; i < kMaxTeam; ++i) universe.push_back(Action::switch_to(i));
          for (const auto& a : universe) {
            bool in = std::find(legal.begin(), legal.end(), a) != legal.end();
            ASSERT_EQ(is_legal(dex, s, side, a), in) << to_string(a);
            if (!in) {
              SeededSource r(1);
              auto other = side == 0 ? y : x;
              if (side == 0) {
                ASSERT_THROW(resolve_turn(dex, s, a, other, r), std::invalid_argument);
              } else {
                ASSERT_THROW(resolve_turn(dex, s, other, a, r), std::invalid_argument);
              }
            }
          }
        }
      }
      validate_state(dex, t1.state);
      s = t1.state;
      ++turns;
    }
  }
}

}  // namespace
}  // namespace duelist
