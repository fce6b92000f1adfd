#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "duelist/chance.hpp"
#include "duelist/team.hpp"
#include "support.hpp"

namespace duelist {
namespace {

using testing::build;
using testing::dex24;
using testing::mini_dex;

TEST(Grid, Midpoints) {
  auto g8 = grid(8);
  ASSERT_EQ(g8.size(), 8u);
  EXPECT_DOUBLE_EQ(g8.front(), 0.0625);
  EXPECT_DOUBLE_EQ(g8[1], 0.1875);
  EXPECT_DOUBLE_EQ(g8.back(), 0.9375);
  EXPECT_EQ(grid(1), std::vector<double>{0.5});
  EXPECT_EQ(grid(2), (std::vector<double>{0.25, 0.75}));
  EXPECT_THROW(grid(0), std::invalid_argument);
}

TEST(Grid, SymmetricAndIncreasing) {
  for (int n = 1; n <= 20; ++n) {
    auto g = grid(n);
    for (int k = 0; k < n; ++k) {
      EXPECT_GT(g[k], 0.0);
      EXPECT_LT(g[k], 1.0);
      if (k > 0) EXPECT_LT(g[k - 1], g[k]);
      EXPECT_NEAR(g[k] + g[n - 1 - k], 1.0, 1e-15);
    }
  }
}

TEST(ChanceConfig, BoundsAreConfigurable) {
  ChanceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n = 7;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.min_n = 2;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n = 21;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

BattleState duel() {
  const auto& dex = mini_dex();
  return make_battle(dex, {build(dex, "Cinder", {"flame"})}, {build(dex, "Puddle", {"splash"})});
}

TEST(ExpandTurn, SixtyFourChildrenAtTheRoot) {
  auto s = duel();
  ChanceConfig cfg;
  auto kids = expand_turn(mini_dex(), s, Action::use_move(0), Action::use_move(0), 1, cfg);
  EXPECT_EQ(kids.size(), 64u);
  double total = 0;
  for (auto& k : kids) total += k.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ExpandTurn, AverageLuckBeyondFullDepth) {
  auto s = duel();
  ChanceConfig cfg;
  auto kids = expand_turn(mini_dex(), s, Action::use_move(0), Action::use_move(0), 2, cfg);
  ASSERT_EQ(kids.size(), 1u);
  EXPECT_EQ(kids[0].r0, 0.5);
  EXPECT_EQ(kids[0].r1, 0.5);
  EXPECT_EQ(kids[0].weight, 1.0);
  auto avg = average_luck_source();
  EXPECT_EQ(kids[0].state, resolve_turn(mini_dex(), s, Action::use_move(0), Action::use_move(0), avg).state);
}

TEST(ExpandTurn, NineActionsEachGive5184RawExpansions) {
  ChanceConfig cfg;
  EXPECT_EQ(raw_expansions(9, 9, 1, cfg), 5184);
  EXPECT_EQ(raw_expansions(9, 9, 2, cfg), 81);
}

TEST(ExpandTurn, ChildCountForEveryGridSize) {
  auto s = duel();
  for (int n = 1; n <= 20; ++n) {
    ChanceConfig cfg;
    cfg.n = n;
    auto kids = expand_turn(mini_dex(), s, Action::use_move(0), Action::use_move(0), 1, cfg);
    ASSERT_EQ(kids.size(), static_cast<std::size_t>(n * n));
    double total = 0;
    for (auto& k : kids) total += k.weight;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(expand_turn(mini_dex(), s, Action::use_move(0), Action::use_move(0), 2, cfg).size(), 1u);
  }
}

TEST(AverageLuck, AccuracyAndRoll) {
  const auto& dex = mini_dex();
  auto avg = average_luck_source();
  EXPECT_LT(avg.draw(0), 0.9);
  EXPECT_GE(avg.draw(1), 0.3);
  // A 30% move never lands under average luck.
  auto s = make_battle(dex, {build(dex, "Shade", {"wisp"})}, {build(dex, "Cinder", {"poke"})});
  auto r = resolve_turn(dex, s, Action::use_move(0), Action::use_move(0), avg);
  EXPECT_EQ(r.state.sides[1].team[0].hp, s.sides[1].team[0].hp);
  // The 90% paralysis move always lands.
  auto s2 = make_battle(dex, {build(dex, "Puddle", {"zap"})}, {build(dex, "Cinder", {"poke"})});
  auto r2 = resolve_turn(dex, s2, Action::use_move(0), Action::use_move(0), avg);
  EXPECT_EQ(r2.state.sides[1].team[0].status, Status::Paralysis);
  EXPECT_DOUBLE_EQ(0.85 + 0.15 * avg.draw(0), 0.925);
}

// Which side's number decided an event, per the labelling table.
int label(const Event& e) {
  switch (e.kind) {
    case EventKind::Damage:
    case EventKind::StatusApplied:
    case EventKind::StatChange:
    case EventKind::FullyParalyzed:
      return e.side;
    case EventKind::Miss:
      return 1 - e.side;
    default:
      return -1;
  }
}

// Perturbing side 1's number can only make the event logs diverge at an
// event decided by side 1.
TEST(SideIsolation, PerturbingSideOneNeverChangesSideZeroEvents) {
  const auto& dex = dex24();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0, diverged = 0;
  for (int battle = 0; battle < 300; ++battle) {
    auto s = make_battle(dex, random_team(dex, rng, 3), random_team(dex, rng, 3));
    while (!s.finished() && s.turn < 60) {
      auto a0 = legal_actions(dex, s, 0);
      auto a1 = legal_actions(dex, s, 1);
      auto x = a0[rng() % a0.size()], y = a1[rng() % a1.size()];
      const double r0 = u(rng), r1 = u(rng), r1b = u(rng);
      FixedPairSource p(r0, r1), q(r0, r1b);
      auto t1 = resolve_turn(dex, s, x, y, p);
      auto t2 = resolve_turn(dex, s, x, y, q);
      std::size_t i = 0;
      while (i < t1.events.size() && i < t2.events.size() && t1.events[i] == t2.events[i]) ++i;
      ++compared;
      if (i < t1.events.size() || i < t2.events.size()) {
        ++diverged;
        ASSERT_TRUE(i < t1.events.size() && i < t2.events.size());
        int l1 = label(t1.events[i]), l2 = label(t2.events[i]);
        EXPECT_TRUE(l1 == 1 || l2 == 1) << to_string(t1.events[i].kind) << " vs " << to_string(t2.events[i].kind);
      }
      s = t1.state;
    }
  }
  EXPECT_GT(compared, 1000);
  EXPECT_GT(diverged, 100);
}

}  // namespace
}  // namespace duelist
