// Acceptance runner: one PASS/FAIL line per criterion. Thresholds and
// workload sizes are pinned below and are not configurable.
//
//   duelist_acceptance [--data DIR] [--only name,name] [--list]
//
// Exits 0 when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "duelist/agents.hpp"
#include "duelist/arena.hpp"
#include "duelist/audit.hpp"
#include "duelist/chance.hpp"
#include "duelist/dist_tt.hpp"
#include "duelist/engine.hpp"
#include "duelist/hash.hpp"
#include "duelist/hidden_info.hpp"
#include "duelist/opponent_model.hpp"
#include "duelist/payoff.hpp"
#include "duelist/random.hpp"
#include "duelist/search.hpp"
#include "duelist/team.hpp"

using namespace duelist;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and workloads.
constexpr double kChanceSeconds = 1.0;
constexpr int kMilpInstances = 200;
constexpr double kMilpObjectiveTol = 1e-9;
constexpr double kMilpSeconds = 60.0;
constexpr int kDominanceMatrices = 500;
constexpr int kPruningDecisions = 1000;
constexpr double kPruningAgreement = 0.99;
constexpr int kModelTrials = 100;
constexpr int kModelObservations = 200;
constexpr double kModelTv = 0.1;
constexpr double kModelSuccess = 0.90;
constexpr int kReplayBattles = 1000;
constexpr double kEloTol = 1e-9;
constexpr int kLadderBattles = 200;
constexpr double kVsRandom = 0.95;
constexpr double kVsGreedy = 0.70;
constexpr double kLadderSeconds = 30 * 60;
constexpr int kFlushMs = 50;
constexpr int kConvergeFlushes = 10;
constexpr double kStallSlack = 0.5;  // seconds a decision may lose to the stall
constexpr int kHidingBattles = 10000;
constexpr int kDepthStudyBattles = 2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string data_dir = DUELIST_DATA_DIR;

const Dex& dex24() {
  static const Dex dex = load_dex(data_dir + "/dex24.json");
  return dex;
}

SearchResources full_resources() {
  SearchResources r;
  r.matrix = std::make_shared<MatchupMatrix>(MatchupMatrix::load(data_dir + "/matchup24.json"));
  r.usage = std::make_shared<UsageStats>(load_usage_stats(data_dir + "/usage24.json", dex24()));
  r.milp = std::make_shared<MilpCache>();
  return r;
}

BattleState random_midgame(const Dex& dex, std::mt19937_64& rng, int team_size, int turns) {
  auto state = make_battle(dex, random_team(dex, rng, team_size), random_team(dex, rng, team_size));
  SeededSource luck(rng());
  for (int t = 0; t < turns; ++t) {
    const auto a0 = legal_actions(dex, state, 0);
    const auto a1 = legal_actions(dex, state, 1);
    auto next = resolve_turn(dex, state, a0[rng() % a0.size()], a1[rng() % a1.size()], luck).state;
    if (next.finished()) break;
    state = next;
  }
  return state;
}

Outcome chance_arithmetic() {
  const auto start = Clock::now();
  const auto& dex = dex24();
  ChanceConfig cfg;
  auto one_move = [&](int species) {
    auto b = canonical_build(dex, SpeciesId(static_cast<std::uint16_t>(species)));
    b.moves.resize(1);
    return b;
  };
  const auto single = make_battle(dex, {one_move(0)}, {one_move(1)});
  const bool one_each = legal_actions(dex, single, 0).size() == 1 && legal_actions(dex, single, 1).size() == 1;
  const auto root = expand_turn(dex, single, Action::use_move(0), Action::use_move(0), 1, cfg);
  double weight = 0.0;
  for (const auto& c : root) weight += c.weight;

  // A fresh six-a-side battle: four moves and five switches per side.
  std::mt19937_64 rng(9);
  const auto full = make_battle(dex, random_team(dex, rng), random_team(dex, rng));
  const auto l0 = legal_actions(dex, full, 0), l1 = legal_actions(dex, full, 1);
  std::size_t raw = 0;
  for (const auto& a0 : l0) {
    for (const auto& a1 : l1) raw += expand_turn(dex, full, a0, a1, 1, cfg).size();
  }

  const auto deep = expand_turn(dex, single, Action::use_move(0), Action::use_move(0), 2, cfg);
  const bool deep_ok = deep.size() == 1 && deep[0].r0 == 0.5 && deep[0].r1 == 0.5;
  const double secs = seconds_since(start);
  const bool pass = one_each && root.size() == 64 && std::abs(weight - 1.0) < 1e-12 && l0.size() == 9 &&
                    l1.size() == 9 && raw == 5184 && raw_expansions(9, 9, 1, cfg) == 5184 && deep_ok &&
                    secs < kChanceSeconds;
  return {pass, fmt::format("root children {} (64), 9x9 raw expansions {} (5184), depth-2 children {} at ({}, {}), "
                            "{:.3f}s (< {}s)",
                            root.size(), raw, deep.size(), deep.empty() ? -1.0 : deep[0].r0,
                            deep.empty() ? -1.0 : deep[0].r1, secs, kChanceSeconds)};
}

Outcome milp_exactness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> score(-2.0, 2.0);
  int matched = 0, total = 0;
  bool k_equals_n_zero = true;
  auto check = [&](const MilpInstance& inst) {
    ++total;
    const auto a = milp_solve(inst), b = brute_force_oracle(inst);
    if (a.selected == b.selected && std::abs(a.objective - b.objective) <= kMilpObjectiveTol) ++matched;
    if (inst.k == inst.n && a.objective != 0.0) k_equals_n_zero = false;
  };
  auto instance = [&](int m, int n, int k) {
    MilpInstance inst{m, n, {}, k};
    for (int i = 0; i < m * n; ++i) {
      // Half-integer values on a third of the entries, so that ties occur.
      inst.s.push_back(rng() % 3 == 0 ? std::round(score(rng) * 2) / 2 : score(rng));
    }
    return inst;
  };
  for (int t = 0; t < kMilpInstances; ++t) {
    const int n = 1 + static_cast<int>(rng() % 16);
    const int m = 1 + static_cast<int>(rng() % 6);
    const int k = static_cast<int>(rng() % (std::min(n, 4) + 1));
    check(instance(m, n, k));
  }
  for (int n : {1, 5, 16}) {
    check(instance(3, n, 0));
    check(instance(3, n, n));
  }
  const double secs = seconds_since(start);
  return {matched == total && k_equals_n_zero && secs < kMilpSeconds,
          fmt::format("{}/{} instances match the oracle (tol {}), K=N objective exactly 0: {}, {:.2f}s (< {}s)", matched,
                      total, kMilpObjectiveTol, k_equals_n_zero ? "yes" : "no", secs, kMilpSeconds)};
}

PayoffMatrix random_matrix(std::mt19937_64& rng) {
  const int r = 1 + static_cast<int>(rng() % 9), c = 1 + static_cast<int>(rng() % 9);
  std::vector<Action> ours, theirs;
  for (int i = 0; i < r; ++i) ours.push_back(Action::use_move(i));
  for (int j = 0; j < c; ++j) theirs.push_back(Action::use_move(j));
  std::vector<double> v;
  const bool coarse = rng() % 2 == 0;
  for (int k = 0; k < r * c; ++k) {
    v.push_back(coarse ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>(-1, 1)(rng));
  }
  return {ours, theirs, v};
}

Outcome dominance_soundness() {
  std::mt19937_64 rng(77);
  int preserved = 0;
  for (int t = 0; t < kDominanceMatrices; ++t) {
    const auto m = random_matrix(rng);
    if (pure_maximin(eliminate_dominated(m).matrix).value == pure_maximin(m).value) ++preserved;
  }

  const auto& dex = dex24();
  SearchConfig on;
  on.time_budget = std::numeric_limits<double>::infinity();
  SearchConfig off = on;
  off.pruning = false;
  int agree = 0;
  std::uint64_t pruned = 0;
  for (int t = 0; t < kPruningDecisions; ++t) {
    const auto state = random_midgame(dex, rng, 3, 1 + static_cast<int>(rng() % 4));
    const int side = static_cast<int>(rng() % 2);
    Searcher a(dex, on), b(dex, off);
    const auto ra = a.search(state, side, nullptr);
    const auto rb = b.search(state, side, nullptr);
    pruned += ra.stats.pruned_rows + ra.stats.pruned_cols;
    if (ra.action == rb.action) ++agree;
  }
  const double rate = static_cast<double>(agree) / kPruningDecisions;
  return {preserved == kDominanceMatrices && rate >= kPruningAgreement,
          fmt::format("maximin preserved on {}/{} matrices; pruned root equals unpruned on {}/{} decisions "
                      "({:.1f}% >= {:.0f}%, {} rows/columns pruned)",
                      preserved, kDominanceMatrices, agree, kPruningDecisions, 100 * rate, 100 * kPruningAgreement,
                      pruned)};
}

Outcome model_convergence() {
  int converged = 0;
  for (int trial = 0; trial < kModelTrials; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    const int cols = 2 + static_cast<int>(rng() % 4);
    std::vector<double> truth(cols);
    for (auto& p : truth) p = std::gamma_distribution<double>(1.0, 1.0)(rng) + 0.05;
    const double sum = std::accumulate(truth.begin(), truth.end(), 0.0);
    for (auto& p : truth) p /= sum;
    std::vector<ActionKey> keys;
    for (int j = 0; j < cols; ++j) keys.push_back({ActionKey::Kind::Move, static_cast<std::uint16_t>(j)});
    std::discrete_distribution<int> opponent(truth.begin(), truth.end());
    OpponentModel model;
    bool hit = false;
    for (int obs = 1; obs <= kModelObservations && !hit; ++obs) {
      const int rows = 1 + static_cast<int>(rng() % 9);
      std::vector<Action> ours, theirs;
      for (int i = 0; i < rows; ++i) ours.push_back(Action::use_move(i));
      for (int j = 0; j < cols; ++j) theirs.push_back(Action::use_move(j));
      std::vector<double> values(static_cast<std::size_t>(rows) * cols);
      for (auto& v : values) v = std::uniform_real_distribution<double>(-1, 1)(rng);
      model.observe({ours, theirs, values}, keys, static_cast<int>(rng() % rows), opponent(rng));
      const auto p = model.predict(keys);
      double tv = 0.0;
      for (int j = 0; j < cols; ++j) tv += std::abs(p[j] - truth[j]);
      hit = tv / 2 < kModelTv;
    }
    if (hit) ++converged;
  }
  OpponentModel empty;
  std::vector<ActionKey> keys;
  for (int j = 0; j < 7; ++j) keys.push_back({ActionKey::Kind::Switch, static_cast<std::uint16_t>(j)});
  const auto p = empty.predict(keys);
  const bool uniform = std::all_of(p.begin(), p.end(), [](double x) { return x == 1.0 / 7.0; });
  const double rate = static_cast<double>(converged) / kModelTrials;
  return {rate >= kModelSuccess && uniform,
          fmt::format("TV < {} within {} observations in {}/{} trials ({:.0f}% >= {:.0f}%); empty history uniform: {}",
                      kModelTv, kModelObservations, converged, kModelTrials, 100 * rate, 100 * kModelSuccess,
                      uniform ? "exactly" : "no")};
}

Outcome replay_fidelity() {
  const auto& dex = dex24();
  MatchConfig cfg;
  cfg.keep_replays = true;
  const auto m = run_match(dex, greedy_agent_spec(dex), random_agent_spec(), {}, {}, kReplayBattles, 31, cfg);
  int exact = 0;
  std::string first;
  for (const auto& r : m.replays) {
    const auto err = verify_replay(dex, Replay::from_jsonl(r.to_jsonl()));
    if (err.empty()) {
      ++exact;
    } else if (first.empty()) {
      first = err;
    }
  }

  SearchConfig scfg;
  scfg.depth = 1;
  scfg.time_budget = std::numeric_limits<double>::infinity();
  const auto search = search_agent_spec(dex, scfg, full_resources());
  MatchConfig small = cfg;
  small.team_size = 3;
  bool same = true;
  for (const auto& [a, b] : {std::pair{search, greedy_agent_spec(dex)}, std::pair{random_agent_spec(), search}}) {
    const auto x = run_match(dex, a, b, {}, {}, 6, 57, small), y = run_match(dex, a, b, {}, {}, 6, 57, small);
    for (std::size_t i = 0; i < x.replays.size(); ++i) same = same && x.replays[i].to_jsonl() == y.replays[i].to_jsonl();
  }
  return {exact == kReplayBattles && same,
          fmt::format("{}/{} replays re-simulate bit-exactly{}; same-seed matches identical: {}", exact, kReplayBattles,
                      first.empty() ? "" : " (first mismatch: " + first + ")", same ? "yes" : "no")};
}

Outcome elo_correctness() {
  const auto [a, b] = elo_update(Rating{}, Rating{}, 1.0, EloConfig{32.0, std::nullopt});
  const bool hand = std::abs(a.elo - 1016.0) < kEloTol && std::abs(b.elo - 984.0) < kEloTol;
  const bool start = Rating{}.elo == 1000.0;

  const auto& dex = dex24();
  LadderConfig cfg;
  cfg.battles_per_pairing = 12;
  cfg.seed = 5;
  cfg.match.team_size = 3;
  const auto r = ladder(dex, {random_agent_spec(), greedy_agent_spec(dex), forfeit_agent_spec()}, cfg);
  double total = 0.0;
  for (const auto& rt : r.ratings) total += rt.elo;
  const bool conserved = std::abs(total - 1000.0 * r.ratings.size()) < kEloTol * r.series.size();
  bool first_from_start = r.series.size() >= 2;
  if (first_from_start) {
    // The first battle's two rows must come from an update of two fresh 1000 ratings.
    const double d = r.series[0].elo - 1000.0;
    first_from_start = std::abs(std::abs(d) - 16.0) < kEloTol && std::abs(r.series[1].elo - (1000.0 - d)) < kEloTol;
  }
  return {hand && start && conserved && first_from_start,
          fmt::format("1000 vs 1000, k=32, win -> {:.4f}/{:.4f} (1016/984); ladder total {:.9f} over {} agents "
                      "({:.1f}); first battle from 1000: {}",
                      a.elo, b.elo, total, r.ratings.size(), 1000.0 * r.ratings.size(),
                      first_from_start && start ? "yes" : "no")};
}

Outcome agent_ladder() {
  const auto start = Clock::now();
  const auto& dex = dex24();
  SearchConfig cfg;  // depth 2, pruning, transposition table, opponent model
  const auto full = search_agent_spec(dex, cfg, full_resources(), "full");
  const auto vs_random = run_match(dex, full, random_agent_spec(), {}, {}, kLadderBattles, 101);
  const auto vs_greedy = run_match(dex, full, greedy_agent_spec(dex), {}, {}, kLadderBattles, 202);
  const double secs = seconds_since(start);
  const double sr = vs_random.score_a(), sg = vs_greedy.score_a();
  return {sr >= kVsRandom && sg >= kVsGreedy && secs < kLadderSeconds,
          fmt::format("vs random {:.1f}% (>= {:.0f}%), vs greedy {:.1f}% (>= {:.0f}%) over {} battles each, {:.0f}s "
                      "(< {:.0f}s)",
                      100 * sr, 100 * kVsRandom, 100 * sg, 100 * kVsGreedy, kLadderBattles, secs, kLadderSeconds)};
}

template <typename Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit) {
  const auto end = Clock::now() + limit;
  while (Clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  return pred();
}

Outcome distributed_tt() {
  using namespace std::chrono_literals;
  std::vector<std::unique_ptr<DistributedTT>> peers;
  std::vector<std::uint16_t> ports;
  for (int i = 0; i < 3; ++i) {
    PeerConfig cfg;
    cfg.peer_id = static_cast<std::uint16_t>(i + 1);
    cfg.flush_interval_ms = kFlushMs;
    peers.push_back(std::make_unique<DistributedTT>(cfg, std::make_shared<TranspositionTable>(1u << 20, cfg.peer_id)));
    ports.push_back(peers.back()->listen_port());
  }
  // Reconnect with the real ports now that every peer is bound.
  peers.clear();
  for (int i = 0; i < 3; ++i) {
    PeerConfig cfg;
    cfg.peer_id = static_cast<std::uint16_t>(i + 1);
    cfg.flush_interval_ms = kFlushMs;
    cfg.listen_address = fmt::format("127.0.0.1:{}", ports[i]);
    for (int j = 0; j < 3; ++j) {
      if (j != i) cfg.peer_addresses.push_back(fmt::format("127.0.0.1:{}", ports[j]));
    }
    peers.push_back(std::make_unique<DistributedTT>(cfg, std::make_shared<TranspositionTable>(1u << 20, cfg.peer_id)));
  }
  const bool connected = wait_for(
      [&] {
        return std::all_of(peers.begin(), peers.end(), [](const auto& p) {
          const auto s = p->stats();
          return s.outbound_connected == 2 && s.inbound_connected == 2;
        });
      },
      5s);

  // Convergence: every peer stores its own entries, then all tables must
  // hold all entries within ten flush intervals.
  constexpr std::uint64_t kPerPeer = 2000;
  const auto stored = Clock::now();
  for (std::size_t i = 0; i < peers.size(); ++i) {
    for (std::uint64_t k = 0; k < kPerPeer; ++k) peers[i]->table()->store(TTKey{k * 3 + i, mix64(k)}, 2, 0.5);
  }
  const bool converged = wait_for(
      [&] {
        return std::all_of(peers.begin(), peers.end(), [&](const auto& p) { return p->table()->size() == 3 * kPerPeer; });
      },
      std::chrono::milliseconds(kConvergeFlushes * kFlushMs));
  const double converge_ms = 1000 * seconds_since(stored);

  // Decisions with and without gossip.
  const auto& dex = dex24();
  SearchConfig cfg;
  cfg.time_budget = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(606);
  int same = 0;
  constexpr int kStates = 5;
  for (int t = 0; t < kStates; ++t) {
    const auto s = random_midgame(dex, rng, 3, 2);
    Searcher alone(dex, cfg);
    const auto base = alone.search(s, 0, nullptr);
    Searcher first(dex, cfg, peers[0]->table());
    first.search(s, 0, nullptr);
    wait_for([&] { return peers[0]->queued() == 0; }, 1s);
    std::this_thread::sleep_for(std::chrono::milliseconds(2 * kFlushMs));
    Searcher second(dex, cfg, peers[2]->table());
    if (second.search(s, 0, nullptr).action == base.action) ++same;
  }

  // A 2 s stall on the flushing peer while it searches.
  const auto s = random_midgame(dex, rng, 3, 1);
  const auto timed = [&] {
    peers[0]->table()->clear();
    Searcher searcher(dex, cfg, peers[0]->table());
    const auto start = Clock::now();
    const auto r = searcher.search(s, 0, nullptr);
    return std::make_pair(r.action, seconds_since(start));
  };
  const auto [calm_action, calm] = timed();
  peers[0]->inject_stall(2000ms);
  std::this_thread::sleep_for(std::chrono::milliseconds(2 * kFlushMs));
  const auto [stalled_action, stalled] = timed();
  const bool stall_ok = stalled_action == calm_action && stalled < calm + kStallSlack;

  for (auto& p : peers) p->stop();
  return {connected && converged && same == kStates && stall_ok,
          fmt::format("mesh connected: {}; {} entries converged in {:.0f} ms (<= {} x {} ms); gossip on/off same root "
                      "action {}/{}; decision {:.3f}s calm vs {:.3f}s during a 2 s stall (slack {}s)",
                      connected ? "yes" : "no", 3 * kPerPeer, converge_ms, kConvergeFlushes, kFlushMs, same, kStates,
                      calm, stalled, kStallSlack)};
}

Outcome information_hiding() {
  std::ifstream in(data_dir + "/dex24.json");
  const auto dex = load_dex_text(plant_sentinels(json::parse(in), 8).dump(), nullptr, "sentinel");
  HidingAuditConfig cfg;
  cfg.battles = kHidingBattles;
  cfg.seed = 4242;
  const auto r = audit_hiding(dex, cfg);
  return {r.battles == kHidingBattles && r.leaks == 0 && r.mentions > 0,
          fmt::format("{} battles, {} frames ({} bytes) to side A, {} revealed sentinel mentions, {} leaks{}", r.battles,
                      r.frames, r.bytes, r.mentions, r.leaks, r.first_leak.empty() ? "" : " in " + r.first_leak)};
}

Outcome pathology_harness() {
  const auto& dex = dex24();
  const auto res = full_resources();
  SearchConfig cfg;
  cfg.time_budget = std::numeric_limits<double>::infinity();
  const auto make = [&](int d) {
    auto c = cfg;
    c.depth = d;
    return search_agent_spec(dex, c, res, fmt::format("search-d{}", d));
  };
  MatchConfig match;
  match.team_size = 2;
  const auto a = depth_study(dex, make, {1, 2, 3}, kDepthStudyBattles, 33, match);
  const auto b = depth_study(dex, make, {1, 2, 3}, kDepthStudyBattles, 33, match);
  const auto csv = depth_study_csv(a);
  const bool nine = a.size() == 9 && std::count(csv.begin(), csv.end(), '\n') == 10;
  const bool same = csv == depth_study_csv(b);
  std::string rates;
  for (const auto& row : a) rates += fmt::format(" {}v{}={:.2f}", row.depth_i, row.depth_j, row.win_rate_i);
  return {nine && same, fmt::format("{} rows, identical on rerun: {};{}", a.size(), same ? "yes" : "no", rates)};
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only;
  bool list = false;
  app.add_option("--data", data_dir, "directory with dex24.json, matchup24.json and usage24.json")->capture_default_str();
  app.add_option("--only", only, "comma-separated criterion names");
  app.add_flag("--list", list, "print the criterion names");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::err);

  const std::vector<Criterion> criteria = {
      {"chance-arithmetic", chance_arithmetic},   {"milp-exactness", milp_exactness},
      {"dominance-pruning", dominance_soundness}, {"opponent-model", model_convergence},
      {"replay-fidelity", replay_fidelity},       {"elo", elo_correctness},
      {"agent-ladder", agent_ladder},             {"distributed-tt", distributed_tt},
      {"information-hiding", information_hiding}, {"pathology-harness", pathology_harness},
  };
  if (list) {
    for (const auto& c : criteria) std::cout << c.name << "\n";
    return 0;
  }
  std::vector<std::string> wanted;
  for (std::size_t pos = 0; !only.empty() && pos <= only.size();) {
    const auto comma = std::min(only.find(',', pos), only.size());
    wanted.push_back(only.substr(pos, comma - pos));
    pos = comma + 1;
  }
  for (const auto& w : wanted) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == w; })) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("[{}] {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail, seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
