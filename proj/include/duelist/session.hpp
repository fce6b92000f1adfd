#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "duelist/random.hpp"
#include "duelist/view.hpp"

namespace duelist {

struct SessionConfig {
  bool inspect = false;  // announced to side 0 in battle-start
  int decision_timeout_ms = 10000;
  int max_turns = 500;
};

// A protocol frame addressed to one side.
struct Outgoing {
  int side = 0;
  nlohmann::json frame;
};

// One battle as a protocol state machine, with no network attached. Every
// call returns the frames it produced, in send order. A turn is resolved
// only once both sides that must act have committed (by choice or timeout);
// a side with nothing to do passes automatically.
class BattleSession {
 public:
  BattleSession(const Dex& dex, Team team0, Team team1, std::uint64_t seed, SessionConfig cfg = {});

  // battle-start and the first request to each side.
  std::vector<Outgoing> start();

  // An illegal or unparseable choice yields an error frame and the request
  // again; a choice while not awaiting one yields an error frame alone.
  std::vector<Outgoing> choose(int side, const Action& action);
  // Accepts "move:2" text or a {"kind", "index"} object as in the request's
  // legal list.
  std::vector<Outgoing> choose(int side, const nlohmann::json& action);

  // Commits a uniformly random legal action for a late side and notes a
  // Timeout event at the head of the next turn's log.
  std::vector<Outgoing> timeout(int side);

  // Ends the battle in the other side's favour.
  std::vector<Outgoing> forfeit(int side, const std::string& reason);

  bool started() const { return started_; }
  bool finished() const { return end_reason_.has_value(); }
  // True while `side` owes a choice for the current request.
  bool awaiting(int side) const;
  // Increments every time new requests go out.
  int request_id() const { return request_id_; }
  std::optional<int> winner() const { return winner_; }
  int turns() const { return turns_; }

  SideView view(int side) const { return view_for_side(*dex_, state_, side, ledger_); }
  const BattleState& state() const { return state_; }
  const RevealLedger& ledger() const { return ledger_; }
  const Team& team(int side) const { return teams_[side]; }

  // The last resolution: both actions and the full, unfiltered log.
  struct Step {
    std::array<Action, 2> actions;
    EventLog events;
  };
  const std::optional<Step>& last_step() const { return last_step_; }

 private:
  std::vector<Outgoing> issue_requests();
  std::vector<Outgoing> resolve();
  std::vector<Outgoing> end(std::optional<int> winner, const std::string& reason);
  nlohmann::json request_frame(int side) const;
  static nlohmann::json error_frame(const std::string& message);

  const Dex* dex_;
  std::array<Team, 2> teams_;
  SessionConfig cfg_;
  BattleState state_;
  RevealLedger ledger_;
  SeededSource rng_;
  std::mt19937_64 timeout_rng_;
  std::array<std::optional<Action>, 2> committed_;
  EventLog pending_;  // Timeout events waiting for the next resolution
  std::optional<Step> last_step_;
  bool started_ = false;
  int request_id_ = 0;
  int turns_ = 0;
  std::optional<int> winner_;
  std::optional<std::string> end_reason_;
};

}  // namespace duelist
