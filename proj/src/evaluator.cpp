#include "duelist/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "duelist/hash.hpp"

namespace duelist {

namespace {

BattleState lone_duel(const Pokemon& a, const Pokemon& b) {
  BattleState s;
  s.sides[0].team[0] = a;
  s.sides[0].team_size = 1;
  s.sides[1].team[0] = b;
  s.sides[1].team_size = 1;
  return s;
}

double maximin(const Dex& dex, const BattleState& s, int depth, const ScoreParams& params) {
  if (depth == 0 || s.finished()) {
    return score_pokemon(s.sides[0].team[0], params) - score_pokemon(s.sides[1].team[0], params);
  }
  const auto ours = legal_actions(dex, s, 0);
  const auto theirs = legal_actions(dex, s, 1);
  double best = -std::numeric_limits<double>::infinity();
  BattleState child;
  for (const auto& a : ours) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& b : theirs) {
      auto luck = average_luck_source();
      resolve_turn_into(dex, s, a, b, luck, child, nullptr);
      worst = std::min(worst, maximin(dex, child, depth - 1, params));
      if (worst <= best) break;  // this row can no longer beat the best one
    }
    best = std::max(best, worst);
  }
  return best;
}

}  // namespace

void ScoreParams::validate() const {
  if (!(alive_bonus >= 0.0)) throw std::invalid_argument("alive bonus must be >= 0");
  if (one_vs_one_depth != 1 && one_vs_one_depth != 2) throw std::invalid_argument("one-vs-one depth must be 1 or 2");
}

double score_pokemon(const Pokemon& p, const ScoreParams& params) {
  if (!p.alive()) return 0.0;
  return static_cast<double>(p.hp) / p.stats.hp + params.alive_bonus;
}

double one_vs_one_value(const Dex& dex, const Pokemon& ours, const Pokemon& theirs, const ScoreParams& params) {
  if (!ours.alive() || !theirs.alive()) throw std::invalid_argument("one-vs-one needs two standing Pokemon");
  const double forward = maximin(dex, lone_duel(ours, theirs), params.one_vs_one_depth, params);
  const double mirrored = maximin(dex, lone_duel(theirs, ours), params.one_vs_one_depth, params);
  return 0.5 * (forward - mirrored);
}

double team_balance_score(const Dex& dex, const BattleState& state, int side, const ScoreParams& params,
                          const PairWeight& weight) {
  const auto& me = state.sides[side];
  const auto& foe = state.sides[1 - side];
  if (!me.any_alive()) return -kLossSentinel;
  if (!foe.any_alive()) return kLossSentinel;
  double total = 0.0, mass = 0.0;
  for (int i = 0; i < me.team_size; ++i) {
    if (!me.team[i].alive()) continue;
    for (int j = 0; j < foe.team_size; ++j) {
      if (!foe.team[j].alive()) continue;
      const double w = weight ? weight(me.team[i], foe.team[j]) : 1.0;
      total += w * one_vs_one_value(dex, me.team[i], foe.team[j], params);
      mass += w;
    }
  }
  return mass > 0.0 ? total / mass : 0.0;
}

// Stats are a function of species and level, so they are left out.
std::uint64_t fingerprint(const Pokemon& p, int pp_cap) {
  Hasher h(0x5eed);
  h.add(std::uint64_t{p.species.value} | std::uint64_t{p.level} << 16 | std::uint64_t{p.hp} << 24 |
        std::uint64_t{p.ability.value} << 40 | std::uint64_t{p.move_count} << 56);
  std::uint64_t moves[2] = {0, 0};
  for (int m = 0; m < p.move_count; ++m) {
    moves[m / 2] |= (std::uint64_t{p.moves[m].move.value} | std::uint64_t(std::min<int>(p.moves[m].pp, pp_cap)) << 16) << (32 * (m % 2));
  }
  h.add(moves[0]);
  h.add(moves[1]);
  std::uint64_t rest = std::uint64_t{p.item.value} | std::uint64_t(static_cast<int>(p.status)) << 16;
  for (int st = 0; st < kStageStats; ++st) rest |= std::uint64_t(static_cast<std::uint8_t>(p.stages[st])) << (24 + 8 * st);
  h.add(rest);
  return h.digest();
}

Evaluator::Evaluator(const Dex& dex, ScoreParams params, std::size_t max_entries)
    : dex_(&dex), params_(params), max_entries_(max_entries) {
  params_.validate();
}

double Evaluator::lookup(std::uint64_t fa, std::uint64_t fb, const Pokemon& a, const Pokemon& b) {
  auto key = std::make_pair(fa, fb);
  if (auto it = cache_.find(key); it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  if (cache_.size() >= max_entries_) cache_.clear();
  const double v = one_vs_one_value(*dex_, a, b, params_);
  ++computed_;
  cache_.emplace(key, v);
  cache_.emplace(std::make_pair(fb, fa), -v);
  return v;
}

double Evaluator::one_vs_one(const Pokemon& ours, const Pokemon& theirs) {
  return lookup(fingerprint(ours, params_.one_vs_one_depth), fingerprint(theirs, params_.one_vs_one_depth), ours, theirs);
}

double Evaluator::team_balance(const BattleState& state, int side) {
  const auto& me = state.sides[side];
  const auto& foe = state.sides[1 - side];
  if (!me.any_alive()) return -kLossSentinel;
  if (!foe.any_alive()) return kLossSentinel;
  std::uint64_t fa[kMaxTeam], fb[kMaxTeam];
  for (int i = 0; i < me.team_size; ++i) fa[i] = me.team[i].alive() ? fingerprint(me.team[i], params_.one_vs_one_depth) : 0;
  for (int j = 0; j < foe.team_size; ++j) fb[j] = foe.team[j].alive() ? fingerprint(foe.team[j], params_.one_vs_one_depth) : 0;
  double total = 0.0;
  int count = 0;
  for (int i = 0; i < me.team_size; ++i) {
    if (!me.team[i].alive()) continue;
    for (int j = 0; j < foe.team_size; ++j) {
      if (!foe.team[j].alive()) continue;
      total += lookup(fa[i], fb[j], me.team[i], foe.team[j]);
      ++count;
    }
  }
  return total / count;
}

MatchupMatrix::MatchupMatrix(std::string dex_hash, int n, ScoreParams params, std::vector<double> cells)
    : dex_hash_(std::move(dex_hash)), n_(n), params_(params), cells_(std::move(cells)) {
  if (n_ < 0 || cells_.size() != static_cast<std::size_t>(n_) * n_) {
    throw std::invalid_argument("matchup matrix cell count does not match n");
  }
}

std::string MatchupMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < n_; ++i) {
    rows.push_back(std::vector<double>(cells_.begin() + static_cast<long>(i) * n_,
                                       cells_.begin() + static_cast<long>(i + 1) * n_));
  }
  nlohmann::json j{{"dex-hash", dex_hash_},
                   {"n", n_},
                   {"params", {{"alive_bonus", params_.alive_bonus}, {"one_vs_one_depth", params_.one_vs_one_depth}}},
                   {"rows", rows}};
  return j.dump();
}

MatchupMatrix MatchupMatrix::from_json(const std::string& text, const std::string& origin) {
  try {
    auto j = nlohmann::json::parse(text);
    ScoreParams p;
    p.alive_bonus = j.at("params").at("alive_bonus").get<double>();
    p.one_vs_one_depth = j.at("params").at("one_vs_one_depth").get<int>();
    const int n = j.at("n").get<int>();
    std::vector<double> cells;
    const auto& rows = j.at("rows");
    if (static_cast<int>(rows.size()) != n) throw LoadError(origin + ": expected " + std::to_string(n) + " rows");
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != n) throw LoadError(origin + ": ragged row");
      for (const auto& v : r) cells.push_back(v.get<double>());
    }
    return MatchupMatrix(j.at("dex-hash").get<std::string>(), n, p, std::move(cells));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(origin + ": " + e.what());
  }
}

void MatchupMatrix::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << to_json() << '\n';
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

MatchupMatrix MatchupMatrix::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw LoadError(file.string() + ": cannot open matchup matrix");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), file.string());
}

MatchupMatrix precompute_matchup_matrix(const Dex& dex, const ScoreParams& params, int threads) {
  params.validate();
  const int n = static_cast<int>(dex.species_count());
  std::vector<Pokemon> reps;
  for (int i = 0; i < n; ++i) reps.push_back(make_pokemon(dex, canonical_build(dex, SpeciesId(i))));
  std::vector<double> cells(static_cast<std::size_t>(n) * n, 0.0);
  auto work = [&](int worker, int workers) {
    for (int i = worker; i < n; i += workers) {
      for (int j = 0; j < n; ++j) {
        if (i != j) cells[static_cast<std::size_t>(i) * n + j] = one_vs_one_value(dex, reps[i], reps[j], params);
      }
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  return MatchupMatrix(dex.content_hash(), n, params, std::move(cells));
}

}  // namespace duelist
