#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "duelist/state.hpp"

namespace duelist {

// A battle position given by how it was reached:
//   {"teams": [[build...], [build...]], "seed": 1,
//    "history": [["move:0", "switch:2"], ...], "side": 0}
// Builds use the team-file form. "seed" (default 1) drives the chance draws
// of the history; "side" (default 0) is the side to act.
struct Scenario {
  std::array<Team, 2> teams;
  std::uint64_t seed = 1;
  std::vector<std::array<Action, 2>> history;
  int side = 0;
  BattleState state;  // after the history
};

// Throws LoadError naming the file and the first bad field or step.
Scenario scenario_from_json(const Dex& dex, const nlohmann::json& j, const std::string& origin);
Scenario load_scenario(const Dex& dex, const std::filesystem::path& file);

// The two starting actives of `dex`'s first two species in canonical builds.
Scenario default_scenario(const Dex& dex);

}  // namespace duelist
