#include "duelist/team.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace duelist {

using nlohmann::json;

json team_to_json(const Dex& dex, const Team& team) {
  json arr = json::array();
  for (const auto& b : team) {
    json j;
    j["species"] = dex.species(b.species).name;
    json moves = json::array();
    for (auto m : b.moves) moves.push_back(dex.move(m).name);
    j["moves"] = moves;
    j["ability"] = dex.ability(b.ability).name;
    if (b.item != kNoItem) j["item"] = dex.item(b.item).name;
    j["level"] = b.level;
    arr.push_back(std::move(j));
  }
  return json{{"team", arr}};
}

Team team_from_json(const Dex& dex, const json& j) {
  if (!j.is_object() || !j.contains("team") || !j["team"].is_array()) {
    throw LoadError("team file: expected an object with a 'team' array");
  }
  Team team;
  const auto& arr = j["team"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    const std::string where = "team[" + std::to_string(i) + "]";
    auto name = [&](const char* key) -> std::string {
      if (!e.contains(key) || !e[key].is_string()) throw LoadError(where + ": missing string '" + key + "'");
      return e[key].get<std::string>();
    };
    Build b;
    auto sp = dex.find_species(name("species"));
    if (!sp) throw LoadError(where + ": unknown species '" + name("species") + "'");
    b.species = *sp;
    if (!e.contains("moves") || !e["moves"].is_array()) throw LoadError(where + ": missing 'moves' array");
    for (const auto& m : e["moves"]) {
      auto id = m.is_string() ? dex.find_move(m.get<std::string>()) : std::nullopt;
      if (!id) throw LoadError(where + ": unknown move " + m.dump());
      b.moves.push_back(*id);
    }
    if (e.contains("ability")) {
      auto ab = dex.find_ability(name("ability"));
      if (!ab) throw LoadError(where + ": unknown ability '" + name("ability") + "'");
      b.ability = *ab;
    } else {
      b.ability = dex.species(b.species).abilities.front();
    }
    if (e.contains("item") && !e["item"].is_null()) {
      auto it = dex.find_item(name("item"));
      if (!it) throw LoadError(where + ": unknown item '" + name("item") + "'");
      b.item = *it;
    }
    if (e.contains("level")) b.level = e["level"].get<int>();
    team.push_back(std::move(b));
  }
  if (auto v = team_violation(dex, team); !v.empty()) throw LoadError("team file: " + v);
  return team;
}

Team load_team(const Dex& dex, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError(file.string() + ": cannot open team file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(file.string() + ": " + e.what());
  }
  try {
    return team_from_json(dex, j);
  } catch (const LoadError& e) {
    throw LoadError(file.string() + ": " + e.what());
  }
}

void save_team(const Dex& dex, const Team& team, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write team file");
  out << team_to_json(dex, team).dump(2) << '\n';
}

Build random_build(const Dex& dex, SpeciesId species, std::mt19937_64& rng, double item_chance) {
  const auto& sp = dex.species(species);
  Build b;
  b.species = species;
  std::vector<MoveId> pool = sp.learnset;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min<std::size_t>(pool.size(), kMaxMoves));
  std::sort(pool.begin(), pool.end());
  b.moves = pool;
  b.ability = sp.abilities[std::uniform_int_distribution<std::size_t>(0, sp.abilities.size() - 1)(rng)];
  if (dex.item_count() > 0 && std::uniform_real_distribution<double>(0, 1)(rng) < item_chance) {
    b.item = ItemId(std::uniform_int_distribution<std::size_t>(0, dex.item_count() - 1)(rng));
  }
  return b;
}

Team random_team(const Dex& dex, std::mt19937_64& rng, int size, int moves_per_build) {
  if (size < 1 || size > kMaxTeam || static_cast<std::size_t>(size) > dex.species_count()) {
    throw std::invalid_argument("random_team: unsupported team size " + std::to_string(size));
  }
  std::vector<std::uint16_t> ids(dex.species_count());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint16_t>(i);
  std::shuffle(ids.begin(), ids.end(), rng);
  Team team;
  for (int i = 0; i < size; ++i) {
    Build b = random_build(dex, SpeciesId(ids[i]), rng);
    if (static_cast<int>(b.moves.size()) > moves_per_build) b.moves.resize(moves_per_build);
    team.push_back(std::move(b));
  }
  return team;
}

std::string team_violation(const Dex& dex, const Team& team) {
  if (team.empty() || team.size() > kMaxTeam) return "a team has one to six members";
  std::set<SpeciesId> seen;
  for (const auto& b : team) {
    if (auto v = build_violation(dex, b); !v.empty()) return v;
    if (!seen.insert(b.species).second) return "duplicate species " + dex.species(b.species).name;
  }
  return {};
}

}  // namespace duelist
