#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "duelist/state.hpp"

namespace duelist {

// Team files: {"team": [{"species", "moves": [...], "ability", "item"?, "level"?}]}
nlohmann::json team_to_json(const Dex& dex, const Team& team);
Team team_from_json(const Dex& dex, const nlohmann::json& j);
Team load_team(const Dex& dex, const std::filesystem::path& file);
void save_team(const Dex& dex, const Team& team, const std::filesystem::path& file);

// A uniformly random legal build: up to four distinct learnable moves, an
// ability from the pool and, with probability `item_chance`, an item.
Build random_build(const Dex& dex, SpeciesId species, std::mt19937_64& rng, double item_chance = 0.5);

// `size` random builds of distinct species.
Team random_team(const Dex& dex, std::mt19937_64& rng, int size = kMaxTeam, int moves_per_build = kMaxMoves);

// Empty when the team is legal (including distinct species), otherwise the
// first violation.
std::string team_violation(const Dex& dex, const Team& team);

}  // namespace duelist
