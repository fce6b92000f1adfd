// Command line front end: debugging aids, offline precomputation, arena
// runs, team generation, a gossip peer and the battle server.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "duelist/agents.hpp"
#include "duelist/arena.hpp"
#include "duelist/chance.hpp"
#include "duelist/dist_tt.hpp"
#include "duelist/hash.hpp"
#include "duelist/scenario.hpp"
#include "duelist/search.hpp"
#include "duelist/server.hpp"
#include "duelist/team.hpp"
#include "duelist/team_builder.hpp"

namespace fs = std::filesystem;
using namespace duelist;

namespace {

std::atomic<bool> interrupted{false};

void on_signal(int) { interrupted = true; }

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string write_or_print(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return "stdout";
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
  return out;
}

// Options shared by every command that builds agents.
struct AgentOptions {
  std::string dex = "data/dex24.json";
  std::string matrix;
  std::string usage;
  int depth = 2;
  int n = 8;
  double time_budget = 5.0;
  int threads = 1;

  void add(CLI::App* app) {
    app->add_option("--dex", dex, "dex JSON file")->capture_default_str();
    app->add_option("--matrix", matrix, "matchup matrix file (computed on the fly when absent)");
    app->add_option("--usage", usage, "usage statistics file");
    app->add_option("--depth", depth, "search depth for 'search' agents")->capture_default_str();
    app->add_option("--n", n, "chance grid size")->capture_default_str();
    app->add_option("--time", time_budget, "seconds per search decision (0: unlimited)")->capture_default_str();
  }

  SearchConfig search() const {
    SearchConfig cfg;
    cfg.depth = depth;
    cfg.chance.n = n;
    cfg.time_budget = time_budget > 0 ? time_budget : std::numeric_limits<double>::infinity();
    return cfg;
  }

  SearchResources resources(const Dex& d) const {
    SearchResources r;
    if (!matrix.empty()) {
      r.matrix = std::make_shared<MatchupMatrix>(MatchupMatrix::load(matrix));
      if (r.matrix->dex_hash() != d.content_hash()) throw LoadError(matrix + ": matrix was computed for another dex");
    } else {
      spdlog::info("no --matrix given; computing one for {} species", d.species_count());
      r.matrix = std::make_shared<MatchupMatrix>(precompute_matchup_matrix(d, ScoreParams{}));
    }
    if (!usage.empty()) r.usage = std::make_shared<UsageStats>(load_usage_stats(usage, d));
    return r;
  }

  AgentSpec agent(const std::string& name, const Dex& d, const SearchResources& res) const {
    return agent_spec_from_name(name, d, search(), res);
  }

  bool needs_search(const std::vector<std::string>& names) const {
    return std::any_of(names.begin(), names.end(), [](const auto& n) { return n.rfind("search", 0) == 0; });
  }
};

void print_matrix(const PayoffMatrix& m) {
  std::string header = fmt::format("{:>10}", "");
  for (const auto& a : m.theirs) header += fmt::format(" {:>10}", to_string(a));
  std::cout << header << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    std::string row = fmt::format("{:>10}", to_string(m.ours[i]));
    for (int j = 0; j < m.cols(); ++j) row += fmt::format(" {:>10.4f}", m.at(i, j));
    std::cout << row << "\n";
  }
}

Scenario scenario_or_default(const Dex& dex, const std::string& file) {
  return file.empty() ? default_scenario(dex) : load_scenario(dex, file);
}

void chance_expand(const std::string& dex_file, const std::string& state_file, int n, int depth) {
  const auto dex = load_dex(dex_file);
  const auto sc = scenario_or_default(dex, state_file);
  ChanceConfig cfg;
  cfg.n = n;
  cfg.validate();
  const auto a0 = legal_actions(dex, sc.state, 0).front();
  const auto a1 = legal_actions(dex, sc.state, 1).front();
  const auto children = expand_turn(dex, sc.state, a0, a1, depth, cfg);
  fmt::print("joint action {} / {} at depth {}: {} children\n", to_string(a0), to_string(a1), depth, children.size());
  double total = 0.0;
  for (const auto& c : children) {
    total += c.weight;
    fmt::print("  r0 {:.4f}  r1 {:.4f}  weight {:.6f}  hp {}/{}\n", c.r0, c.r1, c.weight,
               c.state.sides[0].active_pokemon().hp, c.state.sides[1].active_pokemon().hp);
  }
  fmt::print("total weight {:.6f}\n", total);
}

void search_cmd(const AgentOptions& opt, const std::string& state_file, bool no_prune, bool no_tt) {
  const auto dex = load_dex(opt.dex);
  const auto sc = scenario_or_default(dex, state_file);
  auto cfg = opt.search();
  cfg.pruning = !no_prune;
  cfg.use_tt = !no_tt;
  cfg.threads = opt.threads;
  Searcher searcher(dex, cfg);
  const auto r = searcher.search(sc.state, sc.side, nullptr);
  fmt::print("side {} plays {} (value {:.4f})\n", sc.side, to_string(r.action), r.value);
  if (r.root.rows() > 0) print_matrix(r.root);
  const auto& s = r.stats;
  fmt::print("depth {} nodes {} leaves {} tt-hits {} chance-children {} pruned-rows {} pruned-cols {} {:.3f}s{}\n",
             s.depth_completed, s.nodes, s.leaves, s.tt_hits, s.chance_children, s.pruned_rows, s.pruned_cols,
             s.seconds, s.timed_out ? " (timed out)" : "");
}

void milp_cmd(const std::string& matrix_file, const std::string& ours_text, const std::string& exclude_text, int k,
              const std::string& dex_file) {
  const auto matrix = MatchupMatrix::load(matrix_file);
  std::optional<Dex> dex;
  if (!dex_file.empty()) dex = load_dex(dex_file);
  auto index = [&](const std::string& token) {
    if (dex) {
      if (auto s = dex->find_species(token)) return static_cast<int>(s->value);
    }
    std::size_t used = 0;
    int i = -1;
    try {
      i = std::stoi(token, &used);
    } catch (const std::exception&) {
    }
    if (used != token.size() || i < 0 || i >= matrix.n()) throw std::invalid_argument("bad species '" + token + "'");
    return i;
  };
  auto name = [&](int i) { return dex ? dex->species(SpeciesId(i)).name : std::to_string(i); };

  std::vector<int> ours;
  for (const auto& t : split(ours_text)) ours.push_back(index(t));
  std::vector<bool> excluded(matrix.n(), false);
  for (const auto& t : split(exclude_text)) excluded[index(t)] = true;
  std::vector<int> columns;
  for (int c = 0; c < matrix.n(); ++c) {
    if (!excluded[c]) columns.push_back(c);
  }
  MilpInstance inst;
  inst.m = static_cast<int>(ours.size());
  inst.n = static_cast<int>(columns.size());
  inst.k = k;
  for (int r : ours) {
    for (int c : columns) inst.s.push_back(matrix.at(r, c));
  }
  const auto sol = milp_solve(inst);
  std::vector<std::string> picked;
  for (int i : sol.selected) picked.push_back(name(columns[i]));
  fmt::print("selected: {}\nobjective: {:.9f}\nnodes: {}\n", fmt::join(picked, ", "), sol.objective, sol.nodes);
}

std::vector<Team> load_team_dir(const Dex& dex, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("no such directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Team> teams;
  for (const auto& f : files) teams.push_back(load_team(dex, f));
  if (teams.empty()) throw LoadError(dir.string() + " holds no .json team files");
  return teams;
}

void teamgen(const AgentOptions& opt, const std::string& pool_dir, const std::string& seeds_dir, GaConfig ga,
             const std::string& agent, const std::string& out_dir) {
  const auto dex = load_dex(opt.dex);
  const auto pool = load_team_dir(dex, pool_dir);
  std::vector<Team> seeds;
  if (!seeds_dir.empty()) seeds = load_team_dir(dex, seeds_dir);
  SearchResources res;
  if (opt.needs_search({agent})) res = opt.resources(dex);
  const auto spec = opt.agent(agent, dex, res);
  FitnessSetup setup{spec, spec, {}};
  setup.match.threads = opt.threads;
  const auto r = evolve(ga, dex, pool, setup, seeds);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < r.teams.size(); ++i) {
    save_team(dex, r.teams[i], fs::path(out_dir) / fmt::format("team-{:02d}.json", i));
  }
  std::string log = "generation,best,mean\n";
  for (const auto& g : r.log) log += fmt::format("{},{:.6f},{:.6f}\n", g.generation, g.best, g.mean);
  write_or_print(log, (fs::path(out_dir) / "fitness.csv").string());
  fmt::print("wrote {} teams to {}; best fitness {:.3f}\n", r.teams.size(), out_dir, r.fitnesses.front());
}

void serve_peer(const PeerConfig& cfg, bool stats, int store, double duration) {
  auto table = std::make_shared<TranspositionTable>(1u << 22, cfg.peer_id);
  DistributedTT peer(cfg, table);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  for (int i = 0; i < store; ++i) {
    const auto h = mix64(cfg.peer_id * 0x100000000ULL + static_cast<std::uint64_t>(i));
    table->store(TTKey{h, mix64(h)}, 1 + i % 3, static_cast<double>(i % 100) / 100.0);
  }
  const auto start = std::chrono::steady_clock::now();
  auto dump = [&] {
    const auto s = peer.stats();
    fmt::print(
        "{{\"peer\": {}, \"table\": {}, \"enqueued\": {}, \"sent\": {}, \"frames-sent\": {}, \"received\": {}, "
        "\"merged\": {}, \"dropped\": {}, \"malformed\": {}, \"outbound\": {}, \"inbound\": {}}}\n",
        cfg.peer_id, table->size(), s.enqueued, s.sent, s.frames_sent, s.received, s.merged, s.dropped, s.malformed,
        s.outbound_connected, s.inbound_connected);
    std::fflush(stdout);
  };
  while (!interrupted) {
    std::this_thread::sleep_for(std::chrono::seconds(1));
    if (stats) dump();
    if (duration > 0 && std::chrono::steady_clock::now() - start >= std::chrono::duration<double>(duration)) break;
  }
  peer.stop();
  if (stats) dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"duelist: battle engine, search agent and tooling"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  // chance expand
  auto* chance = app.add_subcommand("chance", "chance-node tools");
  chance->require_subcommand(1);
  auto* expand = chance->add_subcommand("expand", "print the children of the first joint action of a state");
  std::string chance_dex = "data/dex24.json", chance_state;
  int chance_n = 8, chance_depth = 1;
  expand->add_option("--dex", chance_dex)->capture_default_str();
  expand->add_option("--state", chance_state, "scenario file (default: first two species, one each)");
  expand->add_option("--n", chance_n)->capture_default_str();
  expand->add_option("--depth", chance_depth, "turns from the root")->capture_default_str();

  // precompute-matrix
  auto* precompute = app.add_subcommand("precompute-matrix", "compute the species matchup matrix");
  std::string pre_dex = "data/dex24.json", pre_out;
  ScoreParams params;
  int pre_threads = 1;
  precompute->add_option("--dex", pre_dex)->capture_default_str();
  precompute->add_option("--out", pre_out)->required();
  precompute->add_option("--alive-bonus", params.alive_bonus)->capture_default_str();
  precompute->add_option("--one-vs-one-depth", params.one_vs_one_depth)->capture_default_str();
  precompute->add_option("--threads", pre_threads)->capture_default_str();

  // search
  auto* search = app.add_subcommand("search", "search one position and print the root matrix");
  AgentOptions search_opt;
  search_opt.time_budget = 0;
  search_opt.add(search);
  std::string search_state;
  bool no_prune = false, no_tt = false;
  search->add_option("--state", search_state, "scenario file (default: first two species, one each)");
  search->add_flag("--no-prune", no_prune);
  search->add_flag("--no-tt", no_tt);
  search->add_option("--threads", search_opt.threads)->capture_default_str();

  // milp
  auto* milp = app.add_subcommand("milp", "pick the k most balanced opponent species");
  std::string milp_matrix, milp_ours, milp_exclude, milp_dex;
  int milp_k = 1;
  milp->add_option("--matrix", milp_matrix)->required();
  milp->add_option("--ours", milp_ours, "our species (indices, or names with --dex)")->required();
  milp->add_option("--exclude", milp_exclude, "species removed from the candidates");
  milp->add_option("--k", milp_k)->required();
  milp->add_option("--dex", milp_dex, "dex for species names");

  // teamgen
  auto* gen = app.add_subcommand("teamgen", "evolve teams against a pool");
  AgentOptions gen_opt;
  gen_opt.add(gen);
  GaConfig ga;
  std::string gen_pool, gen_seeds, gen_out, gen_agent = "greedy";
  gen->add_option("--pool", gen_pool, "directory of opponent team files")->required();
  gen->add_option("--seeds", gen_seeds, "directory of seed team files");
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--pop", ga.population_size)->capture_default_str();
  gen->add_option("--gens", ga.generations_max)->capture_default_str();
  gen->add_option("--seed", ga.rng_seed)->capture_default_str();
  gen->add_option("--battles", ga.fitness_battles, "battles per pool team")->capture_default_str();
  gen->add_option("--selection", ga.selection_fraction)->capture_default_str();
  gen->add_option("--mutation", ga.mutation_rate)->capture_default_str();
  gen->add_option("--threshold", ga.fitness_threshold)->capture_default_str();
  gen->add_option("--team-size", ga.team_size)->capture_default_str();
  gen->add_option("--agent", gen_agent, "pilot of both teams")->capture_default_str();
  gen->add_option("--threads", gen_opt.threads)->capture_default_str();

  // random-teams
  auto* rnd = app.add_subcommand("random-teams", "write random legal teams, one file each");
  std::string rnd_dex = "data/dex24.json", rnd_out;
  int rnd_count = 8, rnd_size = kMaxTeam;
  std::uint64_t rnd_seed = 1;
  rnd->add_option("--dex", rnd_dex)->capture_default_str();
  rnd->add_option("--out", rnd_out)->required();
  rnd->add_option("--count", rnd_count)->capture_default_str();
  rnd->add_option("--team-size", rnd_size)->capture_default_str();
  rnd->add_option("--seed", rnd_seed)->capture_default_str();

  // serve-peer
  auto* peer = app.add_subcommand("serve-peer", "run one gossip peer of the distributed table");
  PeerConfig peer_cfg;
  std::string peer_list;
  bool peer_stats = false;
  int peer_store = 0;
  double peer_duration = 0;
  peer->add_option("--id", peer_cfg.peer_id)->capture_default_str();
  peer->add_option("--listen", peer_cfg.listen_address)->capture_default_str();
  peer->add_option("--peers", peer_list, "comma-separated host:port list");
  peer->add_option("--batch", peer_cfg.batch_size)->capture_default_str();
  peer->add_option("--flush-ms", peer_cfg.flush_interval_ms)->capture_default_str();
  peer->add_option("--ttl", peer_cfg.entry_ttl)->capture_default_str();
  peer->add_flag("--stats", peer_stats, "print counters as JSON every second and on exit");
  peer->add_option("--store", peer_store, "store this many synthetic entries at start");
  peer->add_option("--duration", peer_duration, "seconds to run (0: until interrupted)");

  // arena
  auto* arena = app.add_subcommand("arena", "battles between agents");
  arena->require_subcommand(1);
  AgentOptions arena_opt;
  arena_opt.add(arena);
  MatchConfig match;
  std::uint64_t arena_seed = 1;
  arena->add_option("--seed", arena_seed)->capture_default_str();
  arena->add_option("--threads", match.threads)->capture_default_str();
  arena->add_option("--team-size", match.team_size)->capture_default_str();
  arena->add_option("--max-turns", match.battle.max_turns)->capture_default_str();

  auto* run = arena->add_subcommand("run", "A against B");
  std::string run_a = "search", run_b = "random", run_team_a, run_team_b, run_replays;
  int run_n = 20;
  run->add_option("--a", run_a)->capture_default_str();
  run->add_option("--b", run_b)->capture_default_str();
  run->add_option("--battles", run_n)->capture_default_str();
  run->add_option("--team-a", run_team_a, "team file for A (default: random per battle)");
  run->add_option("--team-b", run_team_b, "team file for B");
  run->add_option("--replays", run_replays, "directory for JSONL replays");

  auto* lad = arena->add_subcommand("ladder", "round-robin ELO ladder");
  std::string lad_agents = "random,greedy,search", lad_csv;
  LadderConfig lad_cfg;
  double lad_cap = 0;
  lad->add_option("--agents", lad_agents)->capture_default_str();
  lad->add_option("--battles", lad_cfg.battles_per_pairing, "battles per pairing")->capture_default_str();
  lad->add_option("--k", lad_cfg.elo.k)->capture_default_str();
  lad->add_option("--cap", lad_cap, "clamp each rating change (0: off)");
  lad->add_option("--csv", lad_csv, "rating series output (default stdout)");

  auto* depth = arena->add_subcommand("depth-study", "win rates between search depths");
  std::string depth_list = "1,2,3", depth_csv;
  int depth_n = 10;
  depth->add_option("--depths", depth_list)->capture_default_str();
  depth->add_option("--battles", depth_n, "battles per ordered pair")->capture_default_str();
  depth->add_option("--csv", depth_csv);

  auto* stats = arena->add_subcommand("gen-stats", "usage statistics from replays");
  std::string stats_replays, stats_out;
  stats->add_option("--replays", stats_replays)->required();
  stats->add_option("--out", stats_out)->required();

  // serve
  auto* serve = app.add_subcommand("serve", "WebSocket battle server");
  AgentOptions serve_opt;
  serve_opt.add(serve);
  ServerConfig server_cfg;
  std::string serve_opponents = "search,greedy,random";
  serve->add_option("--port", server_cfg.port)->capture_default_str();
  serve->add_option("--address", server_cfg.address)->capture_default_str();
  serve->add_flag("--inspect", server_cfg.allow_inspect, "allow payoff-inspect");
  serve->add_option("--timeout-ms", server_cfg.decision_timeout_ms)->capture_default_str();
  serve->add_option("--team-size", server_cfg.team_size)->capture_default_str();
  serve->add_option("--opponents", serve_opponents, "agents a challenge may pick; the first is the default")
      ->capture_default_str();
  serve->add_option("--ai-threads", server_cfg.ai_threads)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*expand) {
      chance_expand(chance_dex, chance_state, chance_n, chance_depth);
    } else if (*precompute) {
      const auto dex = load_dex(pre_dex);
      precompute_matchup_matrix(dex, params, pre_threads).save(pre_out);
      fmt::print("wrote {}x{} matrix to {}\n", dex.species_count(), dex.species_count(), pre_out);
    } else if (*search) {
      search_cmd(search_opt, search_state, no_prune, no_tt);
    } else if (*milp) {
      milp_cmd(milp_matrix, milp_ours, milp_exclude, milp_k, milp_dex);
    } else if (*gen) {
      teamgen(gen_opt, gen_pool, gen_seeds, ga, gen_agent, gen_out);
    } else if (*rnd) {
      const auto dex = load_dex(rnd_dex);
      std::mt19937_64 rng(mix64(rnd_seed));
      fs::create_directories(rnd_out);
      for (int i = 0; i < rnd_count; ++i) {
        save_team(dex, random_team(dex, rng, rnd_size), fs::path(rnd_out) / fmt::format("team-{:02d}.json", i));
      }
      fmt::print("wrote {} teams to {}\n", rnd_count, rnd_out);
    } else if (*peer) {
      peer_cfg.peer_addresses = split(peer_list);
      serve_peer(peer_cfg, peer_stats, peer_store, peer_duration);
    } else if (*arena) {
      const auto dex = load_dex(arena_opt.dex);
      match.threads = std::max(1, match.threads);
      if (*run) {
        SearchResources res;
        if (arena_opt.needs_search({run_a, run_b})) res = arena_opt.resources(dex);
        if (!run_replays.empty()) {
          fs::create_directories(run_replays);
          match.replay_dir = run_replays;
        }
        const Team ta = run_team_a.empty() ? Team{} : load_team(dex, run_team_a);
        const Team tb = run_team_b.empty() ? Team{} : load_team(dex, run_team_b);
        const auto a = arena_opt.agent(run_a, dex, res), b = arena_opt.agent(run_b, dex, res);
        const auto r = run_match(dex, a, b, ta, tb, run_n, arena_seed, match);
        fmt::print("{} vs {}: {} battles, {} wins, {} losses, {} draws, score {:.3f}\n", a.name, b.name, run_n,
                   r.wins_a, r.wins_b, r.draws, r.score_a());
      } else if (*lad) {
        const auto names = split(lad_agents);
        SearchResources res;
        if (arena_opt.needs_search(names)) res = arena_opt.resources(dex);
        std::vector<AgentSpec> specs;
        for (const auto& n : names) specs.push_back(arena_opt.agent(n, dex, res));
        lad_cfg.seed = arena_seed;
        lad_cfg.match = match;
        if (lad_cap > 0) lad_cfg.elo.gain_cap = lad_cap;
        const auto r = ladder(dex, specs, lad_cfg);
        write_or_print(ladder_csv(r), lad_csv);
        for (std::size_t i = 0; i < r.agents.size(); ++i) {
          spdlog::info("{}: {:.1f} after {} games", r.agents[i], r.ratings[i].elo, r.ratings[i].games);
        }
      } else if (*depth) {
        std::vector<int> depths;
        for (const auto& d : split(depth_list)) depths.push_back(std::stoi(d));
        const auto res = arena_opt.resources(dex);
        const auto make = [&](int d) { return arena_opt.agent("search:" + std::to_string(d), dex, res); };
        write_or_print(depth_study_csv(depth_study(dex, make, depths, depth_n, arena_seed, match)), depth_csv);
      } else if (*stats) {
        const auto u = generate_usage_stats(dex, stats_replays);
        write_or_print(usage_stats_to_json(u, dex), stats_out);
        fmt::print("usage statistics for {} species written to {}\n", u.species.size(), stats_out);
      }
    } else if (*serve) {
      const auto dex = load_dex(serve_opt.dex);
      const auto names = split(serve_opponents);
      SearchResources res;
      if (serve_opt.needs_search(names)) res = serve_opt.resources(dex);
      for (const auto& n : names) server_cfg.opponents.emplace(n, serve_opt.agent(n, dex, res));
      if (!names.empty()) server_cfg.default_opponent = names.front();
      BattleServer server(dex, server_cfg);
      server.start();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      server.stop();
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
