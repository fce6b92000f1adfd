#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <json.hpp>

#include "duelist/dex.hpp"
#include "duelist/session.hpp"

namespace duelist {

inline constexpr const char* kSentinelPrefix = "sentinel-";

// Appends `count` sentinel species to a dex JSON. Sentinel k copies an
// existing species and gets its own uniquely named copies of up to four of
// its moves, of its first ability and of one item, so any of those names in
// a frame can be traced to one team member.
nlohmann::json plant_sentinels(const nlohmann::json& dex_json, int count);

struct HidingAuditConfig {
  int battles = 10000;
  std::uint64_t seed = 1;
  int team_size = 3;
  double illegal_rate = 0.05;  // chance a choice is replaced by an illegal one first
  double timeout_rate = 0.05;  // chance a side times out instead of choosing
  int max_turns = 200;
  // Applied to every side 0 frame before it is scanned.
  std::function<void(const BattleSession&, nlohmann::json&)> tamper;
};

struct HidingReport {
  int battles = 0;
  std::uint64_t frames = 0;
  std::uint64_t bytes = 0;
  std::uint64_t mentions = 0;  // sentinel names seen in side 0 frames after being revealed
  std::uint64_t leaks = 0;     // ... and before
  std::string first_leak;
};

// Plays random battles through BattleSession with side 1 fielding only
// sentinel species (the dex must come from plant_sentinels) and scans every
// serialized frame sent to side 0 for sentinel names the reveal ledger has
// not disclosed yet.
HidingReport audit_hiding(const Dex& dex, const HidingAuditConfig& cfg);

}  // namespace duelist
