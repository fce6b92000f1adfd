#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "duelist/agents.hpp"
#include "duelist/hidden_info.hpp"

namespace duelist {

struct BattleConfig {
  int max_turns = 500;       // a battle still running after this many turns is a draw
  bool record_views = true;  // store both SideViews in every replay turn
};

struct BattleOutcome {
  int winner = -1;  // side; -1 for a draw
  int turns = 0;
  std::optional<int> forfeited_by;
  std::string error;  // what the forfeiting agent threw
};

// One battle as JSON lines: a header, one record per resolution, a result.
//   header: {"replay": 1, "dex-hash", "seed", "agents": [a0, a1], "teams": [t0, t1], "config"}
//   turn:   {"step", "turn", "views"?, "actions", "draws", "events", "decisions"}
//   result: {"result": {"winner", "turns", "forfeited-by"?, "error"?}}
// Events are stored as integer tuples [kind, side, slot, id, amount, hp_after, max_hp].
struct Replay {
  std::vector<nlohmann::json> lines;

  std::string to_jsonl() const;
  static Replay from_jsonl(const std::string& text);
  static Replay load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
};

struct BattleRecord {
  BattleOutcome outcome;
  Replay replay;
};

// Plays one battle: agents see only their views and filtered events, the
// side without a pending replacement passes, and an agent that throws or
// answers with an illegal action forfeits. Chance comes from SeededSource(seed).
BattleRecord play_battle(const Dex& dex, Agent& side0, Agent& side1, const Team& team0, const Team& team1,
                         std::uint64_t seed, const BattleConfig& cfg = {});

// Replays the recorded actions from the header's teams and seed. Returns an
// empty string when every draw, event and the result match bit for bit,
// otherwise the first mismatch.
std::string verify_replay(const Dex& dex, const Replay& replay);

struct MatchConfig {
  BattleConfig battle;
  int threads = 1;
  int team_size = kMaxTeam;  // random teams when a team is empty
  std::optional<std::filesystem::path> replay_dir;
  bool keep_replays = false;
};

struct MatchResult {
  std::vector<BattleOutcome> battles;  // outcome sides as played
  std::vector<int> a_side;             // side agent A took in each battle
  std::vector<Replay> replays;         // when keep_replays
  int wins_a = 0;
  int wins_b = 0;
  int draws = 0;

  // Wins of A with draws counted one half, over all battles; 0 when empty.
  double score_a() const;
};

// Seed of battle `index` of a run seeded with `seed`.
std::uint64_t battle_seed(std::uint64_t seed, std::uint64_t index);

// n battles; A takes side 0 in even battles and side 1 in odd ones. An empty
// team is replaced by a random team per battle drawn from the battle seed.
MatchResult run_match(const Dex& dex, const AgentSpec& a, const AgentSpec& b, const Team& team_a, const Team& team_b,
                      int n, std::uint64_t seed, const MatchConfig& cfg = {});

struct Rating {
  double elo = 1000.0;
  int games = 0;
};

struct EloConfig {
  double k = 32.0;
  std::optional<double> gain_cap;  // clamps |delta| when set
};

// E_a = 1 / (1 + 10^((b - a) / 400)); a' = a + k (score_a - E_a), b' symmetric.
// Throws std::invalid_argument unless k > 0 and score_a is 0, 0.5 or 1.
std::pair<Rating, Rating> elo_update(const Rating& a, const Rating& b, double score_a, const EloConfig& cfg = {});

struct LadderConfig {
  int battles_per_pairing = 10;
  std::uint64_t seed = 1;
  EloConfig elo;
  MatchConfig match;
};

struct LadderRow {
  int battle = 0;
  std::string agent;
  double elo = 0.0;
};

struct LadderResult {
  std::vector<std::string> agents;
  std::vector<Rating> ratings;
  std::vector<LadderRow> series;  // two rows per battle
};

// Round robin in rounds: every round plays each pairing once, alternating
// sides between rounds, on fresh random teams. Ratings are updated in
// schedule order. Throws std::invalid_argument with fewer than two agents.
LadderResult ladder(const Dex& dex, const std::vector<AgentSpec>& agents, const LadderConfig& cfg);

// "battle,agent,elo" header and one line per row.
std::string ladder_csv(const LadderResult& result);

struct DepthStudyRow {
  int depth_i = 0;
  int depth_j = 0;
  double win_rate_i = 0.0;  // draws count one half
  int battles = 0;
};

// Every ordered pair of depths plays n battles; agents come from `make`.
std::vector<DepthStudyRow> depth_study(const Dex& dex, const std::function<AgentSpec(int depth)>& make,
                                       const std::vector<int>& depths, int n, std::uint64_t seed,
                                       const MatchConfig& cfg = {});

std::string depth_study_csv(const std::vector<DepthStudyRow>& rows);

// Usage statistics from the teams in every *.jsonl replay header under
// `dir`. Throws LoadError when there is none or a replay is for another dex.
UsageStats generate_usage_stats(const Dex& dex, const std::filesystem::path& dir);

}  // namespace duelist
