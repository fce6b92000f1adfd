#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "duelist/events.hpp"
#include "duelist/state.hpp"

namespace duelist {

// What one side has shown the other about a single team member.
struct Revealed {
  bool seen = false;
  std::vector<std::pair<MoveId, int>> moves;  // in order of first use, with use counts
  std::optional<AbilityId> ability;
  std::optional<ItemId> item;
  bool item_consumed = false;

  bool operator==(const Revealed&) const = default;
};

// Revealed properties of both teams, driven only by event logs. Indexed by
// the owning side: ledger.side(1) is what side 0 has learned about side 1.
class RevealLedger {
 public:
  RevealLedger() = default;
  // Marks both starting actives as seen.
  explicit RevealLedger(const BattleState& initial);

  void record(const EventLog& events);

  const std::array<Revealed, kMaxTeam>& side(int owner) const { return revealed_[owner]; }
  const Revealed& slot(int owner, int index) const { return revealed_[owner][index]; }

  bool operator==(const RevealLedger&) const = default;

 private:
  std::array<std::array<Revealed, kMaxTeam>, 2> revealed_{};
};

enum class RequestKind : std::uint8_t { Move, Replacement, Wait };

struct OpponentSlotView {
  bool seen = false;
  // Fields below are meaningful only when seen.
  SpeciesId species;
  int level = 0;
  int hp_percent = 0;  // rounded; 1..100 while alive, 0 once fainted
  Status status = Status::None;
  std::vector<std::pair<MoveId, int>> moves;
  std::optional<AbilityId> ability;
  std::optional<ItemId> item;
  bool item_consumed = false;

  bool operator==(const OpponentSlotView&) const = default;
};

// One player's information-filtered projection of a battle.
struct SideView {
  int side = 0;
  int turn = 1;
  Weather weather = Weather::None;
  int weather_turns = 0;
  SideState own;
  int opp_team_size = 0;
  int opp_active = 0;
  int opp_tailwind_turns = 0;
  int opp_toxic_spikes = 0;
  std::array<std::int8_t, kStageStats> opp_stages{};  // of the opposing active
  std::vector<OpponentSlotView> opp;
  RequestKind request = RequestKind::Wait;
  std::vector<Action> legal;
  std::optional<int> winner;

  bool operator==(const SideView&) const = default;
};

// Visible hp fraction in whole percent; an alive Pokemon never shows 0.
int hp_percent(int hp, int max_hp);

// Projection of `state` for `side`: own team in full, the opponent only
// through `ledger`, public conditions, and the pending request.
SideView view_for_side(const Dex& dex, const BattleState& state, int side, const RevealLedger& ledger);

// The slice of an event log a side may see. Events about the other side keep
// their kind and ids, but exact hp amounts are replaced by percentages
// (amount and hp_after in percent, max_hp = 100).
EventLog events_for_side(const EventLog& events, int side);

// JSON forms used by the server protocol and replays. Names rather than ids.
nlohmann::json to_json(const Dex& dex, const SideView& view);
nlohmann::json to_json(const Dex& dex, const Event& event);
nlohmann::json to_json(const Dex& dex, const Pokemon& p);
nlohmann::json to_json(const Action& a);

}  // namespace duelist
