#include "duelist/scenario.hpp"

#include <fstream>

#include <fmt/format.h>

#include "duelist/engine.hpp"
#include "duelist/random.hpp"
#include "duelist/team.hpp"

namespace duelist {

using json = nlohmann::json;

Scenario scenario_from_json(const Dex& dex, const json& j, const std::string& origin) {
  Scenario sc;
  try {
    const auto& teams = j.at("teams");
    if (!teams.is_array() || teams.size() != 2) throw LoadError("\"teams\" must hold two teams");
    for (int s = 0; s < 2; ++s) {
      sc.teams[s] = team_from_json(dex, json{{"team", teams[s]}});
      if (auto v = team_violation(dex, sc.teams[s]); !v.empty()) throw LoadError(fmt::format("team {}: {}", s, v));
    }
    sc.seed = j.value("seed", std::uint64_t{1});
    sc.side = j.value("side", 0);
    if (sc.side != 0 && sc.side != 1) throw LoadError("\"side\" must be 0 or 1");
    for (const auto& step : j.value("history", json::array())) {
      if (!step.is_array() || step.size() != 2) throw LoadError("history steps are [action0, action1]");
      sc.history.push_back({parse_action(step[0].get<std::string>()), parse_action(step[1].get<std::string>())});
    }
  } catch (const std::exception& e) {
    throw LoadError(origin + ": " + e.what());
  }

  sc.state = make_battle(dex, sc.teams[0], sc.teams[1]);
  SeededSource rng(sc.seed);
  for (std::size_t i = 0; i < sc.history.size(); ++i) {
    const auto& [a0, a1] = sc.history[i];
    if (sc.state.finished()) throw LoadError(fmt::format("{}: history step {}: the battle is already over", origin, i));
    for (int s = 0; s < 2; ++s) {
      if (!is_legal(dex, sc.state, s, sc.history[i][s])) {
        throw LoadError(fmt::format("{}: history step {}: {} is illegal for side {}", origin, i,
                                    to_string(sc.history[i][s]), s));
      }
    }
    sc.state = resolve_turn(dex, sc.state, a0, a1, rng).state;
  }
  return sc;
}

Scenario load_scenario(const Dex& dex, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open scenario " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(file.string() + ": invalid JSON: " + e.what());
  }
  return scenario_from_json(dex, j, file.string());
}

Scenario default_scenario(const Dex& dex) {
  if (dex.species_count() < 2) throw std::invalid_argument("default scenario needs two species");
  Scenario sc;
  sc.teams[0] = {canonical_build(dex, SpeciesId(0))};
  sc.teams[1] = {canonical_build(dex, SpeciesId(1))};
  sc.state = make_battle(dex, sc.teams[0], sc.teams[1]);
  return sc;
}

}  // namespace duelist
