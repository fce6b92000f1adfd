#include <gtest/gtest.h>

#include <fstream>

#include "duelist/audit.hpp"
#include "duelist/engine.hpp"
#include "duelist/session.hpp"
#include "duelist/team.hpp"
#include "support.hpp"

namespace duelist {
namespace {

using nlohmann::json;
using testing::build;
using testing::dex24;
using testing::mini_dex;

std::vector<Outgoing> to_side(const std::vector<Outgoing>& frames, int side) {
  std::vector<Outgoing> out;
  for (const auto& f : frames) {
    if (f.side == side) out.push_back(f);
  }
  return out;
}

BattleSession mini_session(SessionConfig cfg = {}) {
  const auto& dex = mini_dex();
  return BattleSession(dex, {build(dex, "Cinder", {"flame", "poke"}), build(dex, "Shade", {"wisp"})},
                       {build(dex, "Puddle", {"splash", "zap"}), build(dex, "Cinder", {"jab"})}, 3, cfg);
}

TEST(Session, StartSendsBattleStartThenRequests) {
  auto s = mini_session({true, 1234, 50});
  const auto frames = s.start();
  ASSERT_EQ(frames.size(), 4u);
  for (int side = 0; side < 2; ++side) {
    const auto mine = to_side(frames, side);
    ASSERT_EQ(mine.size(), 2u);
    EXPECT_EQ(mine[0].frame["type"], "battle-start");
    EXPECT_EQ(mine[0].frame["side"], side);
    EXPECT_EQ(mine[0].frame["timeout-ms"], 1234);
    EXPECT_EQ(mine[0].frame["inspect"], side == 0);
    EXPECT_EQ(mine[0].frame["team"].size(), 2u);
    EXPECT_EQ(mine[1].frame["type"], "request");
    EXPECT_EQ(mine[1].frame["rid"], 1);
    EXPECT_EQ(mine[1].frame["request"], "move");
  }
  EXPECT_TRUE(s.awaiting(0));
  EXPECT_TRUE(s.awaiting(1));
  EXPECT_THROW(s.start(), StateError);
}

TEST(Session, LegalOptionsMatchTheEngine) {
  auto s = mini_session();
  const auto frames = s.start();
  for (int side = 0; side < 2; ++side) {
    const json legal = to_side(frames, side)[1].frame["view"]["legal"];
    const auto want = legal_actions(mini_dex(), s.state(), side);
    ASSERT_EQ(legal.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(legal[i], to_json(want[i]));
  }
}

TEST(Session, TurnWaitsForBothSides) {
  auto s = mini_session();
  s.start();
  const auto before = s.state();
  EXPECT_TRUE(s.choose(0, json("move:0")).empty());
  EXPECT_EQ(s.state(), before);
  EXPECT_FALSE(s.awaiting(0));
  const auto again = s.choose(0, json("move:1"));
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].frame["message"], "no choice is pending");
  const auto frames = s.choose(1, json{{"kind", "move"}, {"index", 0}});
  EXPECT_NE(s.state(), before);
  EXPECT_EQ(s.turns(), 1);
  ASSERT_TRUE(s.last_step());
  EXPECT_EQ(s.last_step()->actions[0], Action::use_move(0));
  for (int side = 0; side < 2; ++side) {
    const auto mine = to_side(frames, side);
    ASSERT_GE(mine.size(), 2u);
    EXPECT_EQ(mine[0].frame["type"], "state-update");
    EXPECT_FALSE(mine[0].frame["events"].empty());
    EXPECT_EQ(mine[1].frame["type"], "request");
    EXPECT_EQ(mine[1].frame["rid"], 2);
  }
}

TEST(Session, IllegalActionIsRejectedAndReRequested) {
  auto s = mini_session();
  s.start();
  for (const json& bad : {json("switch:0"), json("move:3"), json("dance"), json{{"kind", "move"}}, json(7)}) {
    const auto frames = s.choose(0, bad);
    ASSERT_EQ(frames.size(), 2u) << bad;
    EXPECT_EQ(frames[0].frame["type"], "error");
    EXPECT_EQ(frames[1].frame["type"], "request");
    EXPECT_EQ(frames[1].frame["rid"], 1);
    EXPECT_TRUE(s.awaiting(0));
  }
  EXPECT_EQ(s.choose(0, json("switch:0"))[0].frame["message"], "illegal action");
}

TEST(Session, TimeoutPicksALegalActionAndIsLogged) {
  auto s = mini_session();
  s.start();
  EXPECT_TRUE(s.choose(1, json("move:0")).empty());
  EXPECT_TRUE(s.timeout(1).empty());
  const auto frames = s.timeout(0);
  ASSERT_TRUE(s.last_step());
  EXPECT_TRUE(is_legal(mini_dex(), make_battle(mini_dex(), s.team(0), s.team(1)), 0, s.last_step()->actions[0]));
  EXPECT_EQ(s.last_step()->events.front().kind, EventKind::Timeout);
  EXPECT_EQ(s.last_step()->events.front().side, 0);
  for (int side = 0; side < 2; ++side) {
    const json events = to_side(frames, side)[0].frame["events"];
    EXPECT_EQ(events[0]["kind"], "timeout");
    EXPECT_EQ(events[0]["side"], 0);
  }
}

TEST(Session, WaitingSidePassesDuringReplacement) {
  const auto& dex = mini_dex();
  // Puddle's splash knocks Cinder out, leaving side 0 to replace alone.
  auto cinder = build(dex, "Cinder", {"poke"});
  BattleSession s(dex, {cinder, build(dex, "Shade", {"wisp"})}, {build(dex, "Puddle", {"splash"})}, 1);
  s.start();
  for (int t = 0; t < 10 && !s.state().replacement_pending(); ++t) {
    s.choose(0, json("move:0"));
    s.choose(1, json("move:0"));
  }
  ASSERT_TRUE(s.state().replacement_pending());
  EXPECT_TRUE(s.awaiting(0));
  EXPECT_FALSE(s.awaiting(1));
  EXPECT_EQ(s.view(1).request, RequestKind::Wait);
  const auto turns = s.turns();
  const auto frames = s.choose(0, json("switch:1"));
  EXPECT_EQ(to_side(frames, 1)[0].frame["type"], "state-update");
  EXPECT_EQ(s.turns(), turns);
  EXPECT_FALSE(s.state().replacement_pending());
}

TEST(Session, RandomBattlesEndWithTheEngineWinner) {
  std::mt19937_64 rng(12);
  const auto& dex = dex24();
  for (int b = 0; b < 30; ++b) {
    BattleSession s(dex, random_team(dex, rng, 3), random_team(dex, rng, 3), rng());
    s.start();
    std::vector<Outgoing> last;
    while (!s.finished()) {
      for (int side = 0; side < 2; ++side) {
        if (!s.awaiting(side)) continue;
        const auto legal = legal_actions(dex, s.state(), side);
        last = s.choose(side, legal[rng() % legal.size()]);
      }
    }
    ASSERT_EQ(last.size() >= 2 ? last[last.size() - 1].frame["type"] : json(), "battle-end");
    const auto& end = last.back().frame;
    if (end["reason"] == "knockout") {
      EXPECT_EQ(end["winner"], s.state().winner);
    } else {
      EXPECT_EQ(end["reason"], "turn-limit");
      EXPECT_TRUE(end["winner"].is_null());
    }
    EXPECT_EQ(end["turns"], s.turns());
    EXPECT_EQ(s.choose(0, json("move:0"))[0].frame["type"], "error");
  }
}

TEST(Session, ForfeitEndsTheBattle) {
  auto s = mini_session();
  s.start();
  const auto frames = s.forfeit(1, "gone");
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].frame["winner"], 0);
  EXPECT_EQ(frames[0].frame["reason"], "forfeit");
  EXPECT_TRUE(s.finished());
  EXPECT_FALSE(s.awaiting(0));
  EXPECT_TRUE(s.forfeit(0, "again").empty());
}

TEST(Session, TurnLimitIsADraw) {
  auto s = mini_session({false, 1000, 1});
  s.start();
  s.choose(0, json("move:1"));
  const auto frames = s.choose(1, json("move:1"));
  if (!s.state().finished()) {
    EXPECT_EQ(frames.back().frame["reason"], "turn-limit");
    EXPECT_FALSE(s.winner());
  }
}

json sentinel_dex_json() {
  std::ifstream in(std::string(DUELIST_DATA_DIR) + "/dex24.json");
  return plant_sentinels(json::parse(in), 8);
}

TEST(HidingAudit, SentinelsArePlantedUniquely) {
  const auto j = sentinel_dex_json();
  const auto dex = load_dex_text(j.dump(), nullptr, "sentinel");
  EXPECT_EQ(dex.species_count(), 32u);
  const auto sp = dex.find_species("sentinel-species-3");
  ASSERT_TRUE(sp);
  for (auto m : dex.species(*sp).learnset) EXPECT_EQ(dex.move(m).name.rfind("sentinel-move-3-", 0), 0u);
  EXPECT_TRUE(dex.find_item("sentinel-item-7"));
  EXPECT_TRUE(dex.find_ability("sentinel-ability-0"));
}

TEST(HidingAudit, NoUnrevealedSentinelReachesSideZero) {
  const auto dex = load_dex_text(sentinel_dex_json().dump(), nullptr, "sentinel");
  HidingAuditConfig cfg;
  cfg.battles = 300;
  const auto r = audit_hiding(dex, cfg);
  EXPECT_EQ(r.battles, 300);
  EXPECT_EQ(r.leaks, 0u) << r.first_leak;
  EXPECT_GT(r.mentions, 0u);
  EXPECT_GT(r.frames, 300u * 4);
}

TEST(HidingAudit, CatchesAPlantedLeak) {
  const auto dex = load_dex_text(sentinel_dex_json().dump(), nullptr, "sentinel");
  HidingAuditConfig cfg;
  cfg.battles = 5;
  cfg.tamper = [&](const BattleSession& s, json& frame) {
    frame["bench"] = dex.species(s.team(1).back().species).name;
  };
  const auto r = audit_hiding(dex, cfg);
  EXPECT_GT(r.leaks, 0u);
  EXPECT_NE(r.first_leak.find("sentinel-species-"), std::string::npos);
}

}  // namespace
}  // namespace duelist
