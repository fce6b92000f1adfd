#include "duelist/arena.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "duelist/hash.hpp"
#include "duelist/team.hpp"

namespace duelist {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json event_tuple(const Event& e) {
  return json::array({static_cast<int>(e.kind), e.side, e.slot, e.id, e.amount, e.hp_after, e.max_hp});
}

Event event_from_tuple(const json& j) {
  Event e;
  e.kind = static_cast<EventKind>(j.at(0).get<int>());
  e.side = j.at(1).get<std::int8_t>();
  e.slot = j.at(2).get<std::int8_t>();
  e.id = j.at(3).get<std::uint16_t>();
  e.amount = j.at(4).get<std::int32_t>();
  e.hp_after = j.at(5).get<std::uint16_t>();
  e.max_hp = j.at(6).get<std::uint16_t>();
  return e;
}

json result_line(const BattleOutcome& o) {
  json r = {{"winner", o.winner}, {"turns", o.turns}};
  if (o.forfeited_by) {
    r["forfeited-by"] = *o.forfeited_by;
    r["error"] = o.error;
  }
  return {{"result", r}};
}

std::uint64_t agent_seed(std::uint64_t battle, int side) { return mix64(battle ^ (0xa6e7ULL + side)); }

struct Job {
  const AgentSpec* agents[2];
  Team teams[2];
  std::uint64_t seed = 0;
};

std::vector<BattleRecord> play_jobs(const Dex& dex, const std::vector<Job>& jobs, const MatchConfig& cfg) {
  std::vector<BattleRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& job = jobs[i];
        auto a0 = job.agents[0]->make(agent_seed(job.seed, 0));
        auto a1 = job.agents[1]->make(agent_seed(job.seed, 1));
        out[i] = play_battle(dex, *a0, *a1, job.teams[0], job.teams[1], job.seed, cfg.battle);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Team team_or_random(const Dex& dex, const Team& team, std::mt19937_64& rng, int size) {
  if (!team.empty()) return team;
  return random_team(dex, rng, size);
}

double score_for(const BattleOutcome& o, int side) {
  if (o.winner < 0) return 0.5;
  return o.winner == side ? 1.0 : 0.0;
}

}  // namespace

std::string Replay::to_jsonl() const {
  std::string out;
  for (const auto& line : lines) {
    out += line.dump();
    out += '\n';
  }
  return out;
}

Replay Replay::from_jsonl(const std::string& text) {
  Replay r;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      r.lines.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw LoadError(fmt::format("replay line {}: {}", number, e.what()));
    }
  }
  if (r.lines.empty() || !r.lines.front().contains("replay")) throw LoadError("replay: missing header line");
  return r;
}

Replay Replay::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open replay " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_jsonl(buf.str());
  } catch (const LoadError& e) {
    throw LoadError(file.string() + ": " + e.what());
  }
}

void Replay::save(const fs::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write replay " + file.string());
  out << to_jsonl();
}

BattleRecord play_battle(const Dex& dex, Agent& side0, Agent& side1, const Team& team0, const Team& team1,
                         std::uint64_t seed, const BattleConfig& cfg) {
  Agent* agents[2] = {&side0, &side1};
  BattleRecord rec;
  auto& lines = rec.replay.lines;
  lines.push_back({{"replay", 1},
                   {"dex-hash", dex.content_hash()},
                   {"seed", seed},
                   {"agents", {side0.name(), side1.name()}},
                   {"teams", {team_to_json(dex, team0), team_to_json(dex, team1)}},
                   {"config", {{"max-turns", cfg.max_turns}}}});

  auto state = make_battle(dex, team0, team1);
  RevealLedger ledger(state);
  SeededSource rng(seed);
  auto& outcome = rec.outcome;
  auto forfeit = [&](int side, const std::string& why) {
    outcome.winner = 1 - side;
    outcome.forfeited_by = side;
    outcome.error = why;
    spdlog::warn("battle {}: {} (side {}) forfeits: {}", seed, agents[side]->name(), side, why);
  };

  for (int step = 0; !state.finished(); ++step) {
    const bool move_turn = !state.replacement_pending();
    if (move_turn && outcome.turns >= cfg.max_turns) break;
    SideView views[2] = {view_for_side(dex, state, 0, ledger), view_for_side(dex, state, 1, ledger)};
    Action actions[2];
    bool forfeited = false;
    for (int side = 0; side < 2 && !forfeited; ++side) {
      if (views[side].request == RequestKind::Wait) continue;
      try {
        actions[side] = agents[side]->choose(views[side]);
      } catch (const std::exception& e) {
        forfeit(side, e.what());
        forfeited = true;
        break;
      }
      if (std::find(views[side].legal.begin(), views[side].legal.end(), actions[side]) == views[side].legal.end()) {
        forfeit(side, "illegal action " + to_string(actions[side]));
        forfeited = true;
      }
    }
    if (forfeited) break;

    auto r = resolve_turn(dex, state, actions[0], actions[1], rng);
    if (move_turn) ++outcome.turns;
    ledger.record(r.events);
    for (int side = 0; side < 2 && !forfeited; ++side) {
      try {
        agents[side]->observe(actions[side], events_for_side(r.events, side));
      } catch (const std::exception& e) {
        forfeit(side, e.what());
        forfeited = true;
      }
    }

    json line = {{"step", step}, {"turn", state.turn}};
    if (cfg.record_views) line["views"] = {to_json(dex, views[0]), to_json(dex, views[1])};
    line["actions"] = {to_string(actions[0]), to_string(actions[1])};
    line["draws"] = rng.take_draws();
    json events = json::array();
    for (const auto& e : r.events) events.push_back(event_tuple(e));
    line["events"] = std::move(events);
    json decisions = json::array();
    for (int side = 0; side < 2; ++side) {
      const auto* d = agents[side]->last_decision();
      decisions.push_back(d && views[side].request != RequestKind::Wait ? to_json(*d) : json(nullptr));
    }
    line["decisions"] = std::move(decisions);
    lines.push_back(std::move(line));
    state = std::move(r.state);
    if (forfeited) break;
  }
  if (state.finished() && !outcome.forfeited_by) outcome.winner = state.winner;
  lines.push_back(result_line(outcome));
  return rec;
}

std::string verify_replay(const Dex& dex, const Replay& replay) {
  try {
    if (replay.lines.size() < 2) return "replay has no result line";
    const auto& header = replay.lines.front();
    if (header.at("dex-hash").get<std::string>() != dex.content_hash()) return "replay is for another dex";
    const auto& teams = header.at("teams");
    auto state = make_battle(dex, team_from_json(dex, teams.at(0)), team_from_json(dex, teams.at(1)));
    SeededSource rng(header.at("seed").get<std::uint64_t>());
    for (std::size_t i = 1; i + 1 < replay.lines.size(); ++i) {
      const auto& line = replay.lines[i];
      const auto& acts = line.at("actions");
      auto r = resolve_turn(dex, state, parse_action(acts.at(0).get<std::string>()),
                            parse_action(acts.at(1).get<std::string>()), rng);
      if (rng.take_draws() != line.at("draws").get<std::vector<double>>()) {
        return fmt::format("step {}: chance numbers differ", i - 1);
      }
      const auto& events = line.at("events");
      if (events.size() != r.events.size()) return fmt::format("step {}: event count differs", i - 1);
      for (std::size_t k = 0; k < events.size(); ++k) {
        if (event_from_tuple(events[k]) != r.events[k]) return fmt::format("step {}: event {} differs", i - 1, k);
      }
      state = std::move(r.state);
    }
    const auto& result = replay.lines.back().at("result");
    if (!result.contains("forfeited-by") && result.at("winner").get<int>() != state.winner) {
      return "recorded winner differs";
    }
  } catch (const std::exception& e) {
    return std::string("replay unreadable: ") + e.what();
  }
  return {};
}

double MatchResult::score_a() const {
  if (battles.empty()) return 0.0;
  return (wins_a + 0.5 * draws) / static_cast<double>(battles.size());
}

std::uint64_t battle_seed(std::uint64_t seed, std::uint64_t index) { return mix64(mix64(seed) + index); }

MatchResult run_match(const Dex& dex, const AgentSpec& a, const AgentSpec& b, const Team& team_a, const Team& team_b,
                      int n, std::uint64_t seed, const MatchConfig& cfg) {
  if (n < 0) throw std::invalid_argument("battle count must be >= 0");
  std::vector<Job> jobs;
  MatchResult result;
  for (int i = 0; i < n; ++i) {
    Job job;
    job.seed = battle_seed(seed, i);
    std::mt19937_64 rng(mix64(job.seed + 1));
    Team ta = team_or_random(dex, team_a, rng, cfg.team_size);
    Team tb = team_or_random(dex, team_b, rng, cfg.team_size);
    const int side_a = i % 2;
    job.agents[side_a] = &a;
    job.agents[1 - side_a] = &b;
    job.teams[side_a] = std::move(ta);
    job.teams[1 - side_a] = std::move(tb);
    jobs.push_back(std::move(job));
    result.a_side.push_back(side_a);
  }
  auto records = play_jobs(dex, jobs, cfg);
  if (cfg.replay_dir) fs::create_directories(*cfg.replay_dir);
  for (int i = 0; i < n; ++i) {
    auto& rec = records[i];
    const int side_a = result.a_side[i];
    if (rec.outcome.winner < 0) {
      ++result.draws;
    } else if (rec.outcome.winner == side_a) {
      ++result.wins_a;
    } else {
      ++result.wins_b;
    }
    if (cfg.replay_dir) rec.replay.save(*cfg.replay_dir / fmt::format("battle-{:05d}.jsonl", i));
    result.battles.push_back(rec.outcome);
    if (cfg.keep_replays) result.replays.push_back(std::move(rec.replay));
  }
  return result;
}

std::pair<Rating, Rating> elo_update(const Rating& a, const Rating& b, double score_a, const EloConfig& cfg) {
  if (!(cfg.k > 0.0)) throw std::invalid_argument("elo k-factor must be > 0");
  if (score_a != 0.0 && score_a != 0.5 && score_a != 1.0) throw std::invalid_argument("elo score must be 0, 0.5 or 1");
  const double expected_a = 1.0 / (1.0 + std::pow(10.0, (b.elo - a.elo) / 400.0));
  double delta = cfg.k * (score_a - expected_a);
  if (cfg.gain_cap) delta = std::clamp(delta, -*cfg.gain_cap, *cfg.gain_cap);
  return {Rating{a.elo + delta, a.games + 1}, Rating{b.elo - delta, b.games + 1}};
}

LadderResult ladder(const Dex& dex, const std::vector<AgentSpec>& agents, const LadderConfig& cfg) {
  if (agents.size() < 2) throw std::invalid_argument("a ladder needs at least two agents");
  if (cfg.battles_per_pairing < 0) throw std::invalid_argument("battles per pairing must be >= 0");
  std::vector<Job> jobs;
  std::vector<std::pair<int, int>> players;  // agent index on side 0 and side 1
  for (int round = 0; round < cfg.battles_per_pairing; ++round) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        Job job;
        job.seed = battle_seed(cfg.seed, jobs.size());
        std::mt19937_64 rng(mix64(job.seed + 1));
        job.teams[0] = random_team(dex, rng, cfg.match.team_size);
        job.teams[1] = random_team(dex, rng, cfg.match.team_size);
        const int first = round % 2 == 0 ? static_cast<int>(i) : static_cast<int>(j);
        const int second = first == static_cast<int>(i) ? static_cast<int>(j) : static_cast<int>(i);
        job.agents[0] = &agents[first];
        job.agents[1] = &agents[second];
        players.emplace_back(first, second);
        jobs.push_back(std::move(job));
      }
    }
  }
  const auto records = play_jobs(dex, jobs, cfg.match);

  LadderResult out;
  for (const auto& a : agents) out.agents.push_back(a.name);
  out.ratings.assign(agents.size(), Rating{});
  for (std::size_t b = 0; b < records.size(); ++b) {
    const auto [p0, p1] = players[b];
    auto [r0, r1] = elo_update(out.ratings[p0], out.ratings[p1], score_for(records[b].outcome, 0), cfg.elo);
    out.ratings[p0] = r0;
    out.ratings[p1] = r1;
    out.series.push_back({static_cast<int>(b), agents[p0].name, r0.elo});
    out.series.push_back({static_cast<int>(b), agents[p1].name, r1.elo});
  }
  return out;
}

std::string ladder_csv(const LadderResult& result) {
  std::string out = "battle,agent,elo\n";
  for (const auto& row : result.series) out += fmt::format("{},{},{:.4f}\n", row.battle, row.agent, row.elo);
  return out;
}

std::vector<DepthStudyRow> depth_study(const Dex& dex, const std::function<AgentSpec(int depth)>& make,
                                       const std::vector<int>& depths, int n, std::uint64_t seed,
                                       const MatchConfig& cfg) {
  if (depths.empty()) throw std::invalid_argument("depth study needs at least one depth");
  std::vector<DepthStudyRow> rows;
  for (int di : depths) {
    for (int dj : depths) {
      const auto a = make(di);
      const auto b = make(dj);
      const auto m = run_match(dex, a, b, {}, {}, n, seed, cfg);
      rows.push_back({di, dj, m.score_a(), n});
    }
  }
  return rows;
}

std::string depth_study_csv(const std::vector<DepthStudyRow>& rows) {
  std::string out = "depth_i,depth_j,win_rate_i,battles\n";
  for (const auto& r : rows) out += fmt::format("{},{},{:.4f},{}\n", r.depth_i, r.depth_j, r.win_rate_i, r.battles);
  return out;
}

UsageStats generate_usage_stats(const Dex& dex, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("no replay directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw LoadError("no replays in " + dir.string());

  struct Counts {
    std::map<AbilityId, double> abilities;
    std::map<ItemId, double> items;
    std::map<MoveId, double> moves;
    std::map<std::tuple<std::vector<MoveId>, ItemId, AbilityId>, double> sets;
  };
  std::map<SpeciesId, Counts> counts;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string first;
    if (!std::getline(in, first)) throw LoadError(file.string() + ": empty replay");
    json header;
    try {
      header = json::parse(first);
    } catch (const json::exception& e) {
      throw LoadError(file.string() + ": " + e.what());
    }
    if (!header.contains("replay") || !header.contains("teams")) throw LoadError(file.string() + ": not a replay");
    if (header.value("dex-hash", std::string()) != dex.content_hash()) {
      throw LoadError(file.string() + ": replay is for another dex");
    }
    for (const auto& tj : header.at("teams")) {
      for (const auto& b : team_from_json(dex, tj)) {
        auto& c = counts[b.species];
        c.abilities[b.ability] += 1;
        c.items[b.item] += 1;
        for (auto m : b.moves) c.moves[m] += 1;
        auto sorted = b.moves;
        std::sort(sorted.begin(), sorted.end());
        c.sets[{sorted, b.item, b.ability}] += 1;
      }
    }
  }

  auto normalize = [](auto& dist) {
    double total = 0;
    for (const auto& [k, v] : dist) total += v;
    for (auto& [k, v] : dist) v /= total;
  };
  UsageStats stats;
  for (auto& [species, c] : counts) {
    SpeciesUsage u;
    u.abilities = c.abilities;
    u.items = c.items;
    u.moves = c.moves;
    normalize(u.abilities);
    normalize(u.items);
    normalize(u.moves);
    double total = 0;
    for (const auto& [k, v] : c.sets) total += v;
    for (const auto& [k, v] : c.sets) u.sets.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v / total});
    stats.species.emplace(species, std::move(u));
  }
  return stats;
}

}  // namespace duelist
