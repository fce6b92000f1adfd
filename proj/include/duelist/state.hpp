#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duelist/dex.hpp"

namespace duelist {

// Simplified stat formula: hp = floor(2*base*level/100) + level + 10,
// other = floor(2*base*level/100) + 5. Throws std::invalid_argument
// unless 1 <= level <= 100.
StatBlock compute_stats(const SpeciesDef& species, int level);

struct MoveSlot {
  MoveId move;
  std::uint8_t pp = 0;
  bool operator==(const MoveSlot&) const = default;
};

struct Pokemon {
  SpeciesId species;
  std::uint8_t level = 100;
  StatBlock stats;
  std::uint16_t hp = 0;
  std::array<MoveSlot, kMaxMoves> moves{};
  std::uint8_t move_count = 0;
  AbilityId ability;
  ItemId item = kNoItem;
  Status status = Status::None;
  std::array<std::int8_t, kStageStats> stages{};

  bool alive() const { return hp > 0; }
  bool has_item() const { return item != kNoItem; }
  int stage(Stat s) const { return stages[static_cast<int>(s)]; }
  // Applies a stage delta with clamping to [-6, 6]; returns the applied change.
  int add_stage(Stat s, int delta);
  bool operator==(const Pokemon&) const = default;
};

struct SideState {
  std::array<Pokemon, kMaxTeam> team{};
  std::uint8_t team_size = 0;
  std::uint8_t active = 0;
  std::uint8_t tailwind_turns = 0;
  std::uint8_t toxic_spikes = 0;

  Pokemon& active_pokemon() { return team[active]; }
  const Pokemon& active_pokemon() const { return team[active]; }
  int alive_count() const;
  bool any_alive() const { return alive_count() > 0; }
  // Active fainted while a benched teammate can still come in.
  bool needs_replacement() const;
  bool operator==(const SideState&) const = default;
};

struct BattleState {
  std::array<SideState, 2> sides{};
  Weather weather = Weather::None;
  std::uint8_t weather_turns = 0;
  std::uint16_t turn = 1;
  std::int8_t winner = -1;

  bool finished() const { return winner >= 0; }
  std::optional<int> winner_side() const {
    return winner >= 0 ? std::optional<int>(winner) : std::nullopt;
  }
  // A forced replacement is pending for at least one side.
  bool replacement_pending() const {
    return !finished() && (sides[0].needs_replacement() || sides[1].needs_replacement());
  }
  bool operator==(const BattleState&) const = default;
};

// Fallback slot used when the active Pokemon has no move with PP left.
inline constexpr int kStruggleSlot = kMaxMoves;
inline constexpr int kStrugglePower = 50;

struct Action {
  enum class Kind : std::uint8_t { Move, Switch, Pass };
  Kind kind = Kind::Pass;
  std::uint8_t index = 0;  // move slot or team index

  static Action use_move(int slot) { return {Kind::Move, static_cast<std::uint8_t>(slot)}; }
  static Action switch_to(int team_index) {
    return {Kind::Switch, static_cast<std::uint8_t>(team_index)};
  }
  static Action pass() { return {Kind::Pass, 0}; }

  bool is_move() const { return kind == Kind::Move; }
  bool is_switch() const { return kind == Kind::Switch; }
  bool is_struggle() const { return kind == Kind::Move && index == kStruggleSlot; }
  bool operator==(const Action&) const = default;
};

std::string to_string(const Action& a);
// Parses "move:2", "switch:4", "pass".
Action parse_action(const std::string& text);

// A team member before battle: what a team file stores.
struct Build {
  SpeciesId species;
  std::vector<MoveId> moves;
  AbilityId ability;
  ItemId item = kNoItem;
  int level = 100;
  bool operator==(const Build&) const = default;
};

using Team = std::vector<Build>;

Pokemon make_pokemon(const Dex& dex, const Build& build);
SideState make_side(const Dex& dex, const Team& team);
BattleState make_battle(const Dex& dex, const Team& side0, const Team& side1);

// Canonical representative of a species: its highest-power learnable moves
// (ties by lower move id), first ability, no item, level 100.
Build canonical_build(const Dex& dex, SpeciesId species);

// Returns an empty string when `build` is legal against the dex, otherwise a
// description of the first violation.
std::string build_violation(const Dex& dex, const Build& build);

// Checks every state invariant; throws StateError describing the first failure.
void validate_state(const Dex& dex, const BattleState& state);

}  // namespace duelist
