#include <gtest/gtest.h>

#include <random>

#include "duelist/view.hpp"
#include "support.hpp"

namespace duelist {
namespace {

using testing::build;
using testing::dex24;
using testing::mini_dex;

TEST(View, OnlyTheOpposingActiveIsSeenAtStart) {
  std::mt19937_64 rng(1);
  const auto& dex = dex24();
  auto s = make_battle(dex, random_team(dex, rng), random_team(dex, rng));
  RevealLedger ledger(s);
  auto v = view_for_side(dex, s, 0, ledger);
  ASSERT_EQ(v.opp.size(), 6u);
  EXPECT_TRUE(v.opp[0].seen);
  EXPECT_EQ(v.opp[0].species, s.sides[1].team[0].species);
  EXPECT_EQ(v.opp[0].hp_percent, 100);
  EXPECT_TRUE(v.opp[0].moves.empty());
  EXPECT_FALSE(v.opp[0].item.has_value());
  for (int i = 1; i < 6; ++i) EXPECT_FALSE(v.opp[i].seen);
  EXPECT_EQ(v.own, s.sides[0]);
  EXPECT_EQ(v.request, RequestKind::Move);
  EXPECT_EQ(v.legal, legal_actions(dex, s, 0));
  const auto text = to_json(dex, v).dump();
  int hidden = 0;
  for (int i = 1; i < 6; ++i) {
    const auto sp = s.sides[1].team[i].species;
    bool ours = sp == s.sides[1].team[0].species;
    for (int j = 0; j < 6; ++j) ours = ours || s.sides[0].team[j].species == sp;
    if (ours) continue;
    EXPECT_EQ(text.find(dex.species(sp).name), std::string::npos);
    ++hidden;
  }
  EXPECT_GT(hidden, 0);
}

TEST(View, UsedMovesAndActivatedItemsAppear) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Puddle", {"splash", "zap"})});
  RevealLedger ledger(s);
  auto luck = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(1), luck);
  ledger.record(r.events);
  auto v = view_for_side(dex, r.state, 0, ledger);
  ASSERT_EQ(v.opp[0].moves.size(), 1u);
  EXPECT_EQ(v.opp[0].moves[0].first, *dex.find_move("zap"));
  EXPECT_EQ(v.opp[0].moves[0].second, 1);
  const auto text = to_json(dex, v).dump();
  EXPECT_NE(text.find("zap"), std::string::npos);
  EXPECT_EQ(text.find("splash"), std::string::npos);

  Event item;
  item.kind = EventKind::ItemConsumed;
  item.side = 1;
  item.slot = 0;
  item.id = 3;
  ledger.record({item});
  EXPECT_EQ(ledger.slot(1, 0).item, ItemId{3});
  EXPECT_TRUE(ledger.slot(1, 0).item_consumed);
  EXPECT_FALSE(ledger.slot(0, 0).item.has_value());
}

TEST(View, OpposingHpIsOnlyAPercentage) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Shade", {"poke"})});
  auto luck = average_luck_source();
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), luck);
  auto mine = events_for_side(r.events, 0);
  auto theirs = events_for_side(r.events, 1);
  bool checked = false;
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const auto& e = r.events[i];
    if (e.kind != EventKind::Damage) continue;
    const auto& seen_by_foe = e.side == 1 ? mine[i] : theirs[i];
    const auto& seen_by_owner = e.side == 1 ? theirs[i] : mine[i];
    EXPECT_EQ(seen_by_owner, e);
    EXPECT_EQ(seen_by_foe.max_hp, 100);
    EXPECT_EQ(seen_by_foe.hp_after, hp_percent(e.hp_after, e.max_hp));
    checked = true;
  }
  EXPECT_TRUE(checked);
}

TEST(View, HpPercentNeverShowsZeroWhileAlive) {
  EXPECT_EQ(hp_percent(1, 1000), 1);
  EXPECT_EQ(hp_percent(0, 1000), 0);
  EXPECT_EQ(hp_percent(999, 1000), 100);
  EXPECT_EQ(hp_percent(500, 1000), 50);
}

TEST(View, ReplacementRequestsAndWaiting) {
  const auto& dex = mini_dex();
  auto s = make_battle(dex, {build(dex, "Cinder", {"flame"})},
                       {build(dex, "Puddle", {"splash"}), build(dex, "Shade", {"poke"})});
  s.sides[1].team[0].hp = 0;
  RevealLedger ledger(s);
  auto v0 = view_for_side(dex, s, 0, ledger);
  auto v1 = view_for_side(dex, s, 1, ledger);
  EXPECT_EQ(v0.request, RequestKind::Wait);
  EXPECT_TRUE(v0.legal.empty());
  EXPECT_EQ(v1.request, RequestKind::Replacement);
  EXPECT_EQ(v1.legal, std::vector<Action>{Action::switch_to(1)});
  EXPECT_EQ(v0.opp[0].hp_percent, 0);
}

TEST(View, PureFunctionOfStateAndLedger) {
  std::mt19937_64 rng(4);
  const auto& dex = dex24();
  auto s = make_battle(dex, random_team(dex, rng), random_team(dex, rng));
  RevealLedger ledger(s);
  SeededSource luck(9);
  for (int t = 0; t < 10 && !s.finished(); ++t) {
    auto a0 = legal_actions(dex, s, 0);
    auto a1 = legal_actions(dex, s, 1);
    auto r = resolve_turn(dex, s, a0[rng() % a0.size()], a1[rng() % a1.size()], luck);
    ledger.record(r.events);
    s = r.state;
  }
  for (int side = 0; side < 2; ++side) {
    EXPECT_EQ(view_for_side(dex, s, side, ledger), view_for_side(dex, s, side, ledger));
    EXPECT_EQ(to_json(dex, view_for_side(dex, s, side, ledger)).dump(),
              to_json(dex, view_for_side(dex, s, side, ledger)).dump());
  }
}

}  // namespace
}  // namespace duelist
