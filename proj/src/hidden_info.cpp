#include "duelist/hidden_info.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace duelist {

using nlohmann::json;

const SpeciesUsage* UsageStats::find(SpeciesId s) const {
  auto it = species.find(s);
  return it == species.end() ? nullptr : &it->second;
}

namespace {

constexpr double kSumTolerance = 1e-9;

template <typename Map>
void normalize(Map& dist, const std::string& where) {
  double total = 0.0;
  for (const auto& [k, v] : dist) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw LoadError(where + ": frequencies must be finite and >= 0");
    total += v;
  }
  if (dist.empty()) return;
  if (!(total > 0.0)) throw LoadError(where + ": frequencies sum to 0");
  if (std::abs(total - 1.0) > kSumTolerance) {
    spdlog::warn("{}: frequencies sum to {}, renormalizing", where, total);
  }
  for (auto& [k, v] : dist) v /= total;
}

void normalize_sets(std::vector<UsageSet>& sets, const std::string& where) {
  double total = 0.0;
  for (const auto& s : sets) {
    if (!(s.freq >= 0.0) || !std::isfinite(s.freq)) throw LoadError(where + ": set frequencies must be finite and >= 0");
    total += s.freq;
  }
  if (sets.empty()) return;
  if (!(total > 0.0)) throw LoadError(where + ": set frequencies sum to 0");
  if (std::abs(total - 1.0) > kSumTolerance) spdlog::warn("{}: set frequencies sum to {}, renormalizing", where, total);
  for (auto& s : sets) s.freq /= total;
}

template <typename T, typename Find>
T resolve(const std::string& name, Find find, const std::string& what, const std::string& where) {
  auto id = find(name);
  if (!id) throw LoadError(where + ": unknown " + what + " '" + name + "'");
  return *id;
}

}  // namespace

UsageStats usage_stats_from_json(const std::string& text, const Dex& dex, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw LoadError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw LoadError(origin + ": top level must be an object keyed by species");
  auto find_move = [&](const std::string& n) { return dex.find_move(n); };
  auto find_ability = [&](const std::string& n) { return dex.find_ability(n); };
  auto find_item = [&](const std::string& n) { return dex.find_item(n); };
  UsageStats out;
  try {
    for (const auto& [name, entry] : doc.items()) {
      const std::string where = origin + ": " + name;
      auto sid = resolve<SpeciesId>(name, [&](const std::string& n) { return dex.find_species(n); }, "species", origin);
      const auto& sp = dex.species(sid);
      SpeciesUsage u;
      const json abilities_json = entry.value("abilities", json::object());
      const json items_json = entry.value("items", json::object());
      const json moves_json = entry.value("moves", json::object());
      const json sets_json = entry.value("sets", json::array());
      for (const auto& [a, f] : abilities_json.items()) {
        auto id = resolve<AbilityId>(a, find_ability, "ability", where);
        if (!sp.has_ability(id)) throw LoadError(where + ": ability '" + a + "' not in its pool");
        u.abilities[id] = f.get<double>();
      }
      for (const auto& [i, f] : items_json.items()) {
        ItemId id = i == "none" ? kNoItem : resolve<ItemId>(i, find_item, "item", where);
        u.items[id] = f.get<double>();
      }
      for (const auto& [m, f] : moves_json.items()) {
        auto id = resolve<MoveId>(m, find_move, "move", where);
        if (!sp.can_learn(id)) throw LoadError(where + ": cannot learn '" + m + "'");
        u.moves[id] = f.get<double>();
      }
      for (const auto& js : sets_json) {
        UsageSet s;
        for (const auto& m : js.at("moves")) {
          auto id = resolve<MoveId>(m.get<std::string>(), find_move, "move", where);
          if (!sp.can_learn(id)) throw LoadError(where + ": set move '" + m.get<std::string>() + "' not learnable");
          s.moves.push_back(id);
        }
        std::sort(s.moves.begin(), s.moves.end());
        if (s.moves.empty() || s.moves.size() > kMaxMoves ||
            std::adjacent_find(s.moves.begin(), s.moves.end()) != s.moves.end()) {
          throw LoadError(where + ": a set needs one to four distinct moves");
        }
        const auto& item = js.at("item");
        s.item = item.is_null() ? kNoItem : resolve<ItemId>(item.get<std::string>(), find_item, "item", where);
        s.ability = resolve<AbilityId>(js.at("ability").get<std::string>(), find_ability, "ability", where);
        if (!sp.has_ability(s.ability)) throw LoadError(where + ": set ability not in its pool");
        s.freq = js.at("freq").get<double>();
        u.sets.push_back(std::move(s));
      }
      normalize(u.abilities, where + " abilities");
      normalize(u.items, where + " items");
      normalize(u.moves, where + " moves");
      normalize_sets(u.sets, where + " sets");
      out.species[sid] = std::move(u);
    }
  } catch (const json::exception& e) {
    throw LoadError(origin + ": " + e.what());
  }
  return out;
}

UsageStats load_usage_stats(const std::filesystem::path& file, const Dex& dex) {
  std::ifstream in(file);
  if (!in) throw LoadError(file.string() + ": cannot open usage stats");
  std::stringstream ss;
  ss << in.rdbuf();
  return usage_stats_from_json(ss.str(), dex, file.string());
}

std::string usage_stats_to_json(const UsageStats& stats, const Dex& dex) {
  json doc = json::object();
  for (const auto& [sid, u] : stats.species) {
    json e;
    e["abilities"] = json::object();
    for (const auto& [a, f] : u.abilities) e["abilities"][dex.ability(a).name] = f;
    e["items"] = json::object();
    for (const auto& [i, f] : u.items) e["items"][i == kNoItem ? "none" : dex.item(i).name] = f;
    e["moves"] = json::object();
    for (const auto& [m, f] : u.moves) e["moves"][dex.move(m).name] = f;
    e["sets"] = json::array();
    for (const auto& s : u.sets) {
      json moves = json::array();
      for (auto m : s.moves) moves.push_back(dex.move(m).name);
      e["sets"].push_back({{"moves", moves},
                           {"item", s.item == kNoItem ? json(nullptr) : json(dex.item(s.item).name)},
                           {"ability", dex.ability(s.ability).name},
                           {"freq", s.freq}});
    }
    doc[dex.species(sid).name] = std::move(e);
  }
  return doc.dump(2);
}

namespace {

template <typename Id>
Id argmax(const std::map<Id, double>& scores, Id fallback) {
  Id best = fallback;
  double best_score = -1.0;
  for (const auto& [id, s] : scores) {
    if (s > best_score) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

void append_moves(std::vector<MoveId>& moves, const std::map<MoveId, double>& scores) {
  std::vector<std::pair<double, MoveId>> ranked;
  for (const auto& [m, s] : scores) {
    if (std::find(moves.begin(), moves.end(), m) == moves.end()) ranked.emplace_back(s, m);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [s, m] : ranked) {
    if (moves.size() >= kMaxMoves) break;
    moves.push_back(m);
  }
}

}  // namespace

Build impute_known_species(const PartialPokemon& partial, const UsageStats& stats, const Dex& dex) {
  Build out;
  out.species = partial.species;
  out.level = partial.level;
  out.moves = partial.moves;
  if (out.moves.size() > kMaxMoves) throw std::invalid_argument("more than four revealed moves");
  const auto* usage = stats.find(partial.species);
  if (!usage) {
    spdlog::debug("no usage statistics for {}; starting from its canonical build", dex.species(partial.species).name);
    const auto canon = canonical_build(dex, partial.species);
    for (auto m : canon.moves) {
      if (out.moves.size() < kMaxMoves && std::find(out.moves.begin(), out.moves.end(), m) == out.moves.end()) {
        out.moves.push_back(m);
      }
    }
    out.ability = partial.ability.value_or(canon.ability);
    out.item = partial.item.value_or(canon.item);
    return out;
  }

  std::map<AbilityId, double> abilities;
  std::map<ItemId, double> items;
  std::map<MoveId, double> moves;
  for (const auto& s : usage->sets) {
    bool ok = (!partial.ability || s.ability == *partial.ability) && (!partial.item || s.item == *partial.item);
    for (auto m : partial.moves) ok = ok && std::binary_search(s.moves.begin(), s.moves.end(), m);
    if (!ok) continue;
    abilities[s.ability] += s.freq;
    items[s.item] += s.freq;
    for (auto m : s.moves) moves[m] += s.freq;
  }
  const bool conditional = !abilities.empty();
  if (!conditional) {
    abilities = usage->abilities;
    items = usage->items;
    moves = usage->moves;
  }
  const auto& sp = dex.species(partial.species);
  out.ability = partial.ability ? *partial.ability : argmax(abilities, sp.abilities.front());
  out.item = partial.item ? *partial.item : argmax(items, kNoItem);
  append_moves(out.moves, moves);
  if (conditional) append_moves(out.moves, usage->moves);
  if (out.moves.empty()) out.moves = canonical_build(dex, partial.species).moves;
  return out;
}

void MilpInstance::validate() const {
  if (m < 1) throw std::invalid_argument("milp: at least one row required");
  if (n < 0) throw std::invalid_argument("milp: negative column count");
  if (s.size() != static_cast<std::size_t>(m) * n) throw std::invalid_argument("milp: matrix size does not match m x n");
  if (k < 0 || k > n) {
    throw std::invalid_argument("milp: k = " + std::to_string(k) + " outside [0, " + std::to_string(n) + "]");
  }
  for (double v : s) {
    if (!std::isfinite(v)) throw std::invalid_argument("milp: non-finite matrix entry");
  }
}

namespace {

std::vector<double> row_totals(const MilpInstance& inst) {
  std::vector<double> t(inst.m, 0.0);
  for (int j = 0; j < inst.m; ++j) {
    for (int i = 0; i < inst.n; ++i) t[j] += inst.at(j, i);
  }
  return t;
}

double objective_from_sums(const MilpInstance& inst, const std::vector<double>& totals,
                           const std::vector<double>& sums) {
  double obj = 0.0;
  for (int j = 0; j < inst.m; ++j) obj += std::abs(inst.n * sums[j] - inst.k * totals[j]);
  return inst.n > 0 ? obj / inst.n : 0.0;
}

bool better(double obj, const std::vector<int>& sel, double best, const std::vector<int>& best_sel, bool have) {
  if (!have) return true;
  if (obj != best) return obj < best;
  return sel < best_sel;
}

}  // namespace

double milp_objective(const MilpInstance& inst, const std::vector<int>& selected) {
  const auto totals = row_totals(inst);
  std::vector<double> sums(inst.m, 0.0);
  for (int j = 0; j < inst.m; ++j) {
    for (int i : selected) sums[j] += inst.at(j, i);
  }
  return objective_from_sums(inst, totals, sums);
}

MilpSolution brute_force_oracle(const MilpInstance& inst) {
  inst.validate();
  double count = 1.0;
  for (int t = 0; t < inst.k; ++t) count = count * (inst.n - t) / (t + 1);
  if (count > 1e6) {
    throw std::invalid_argument("brute force refused: C(" + std::to_string(inst.n) + ", " + std::to_string(inst.k) +
                                ") exceeds 1e6 subsets");
  }
  MilpSolution best;
  bool have = false;
  std::vector<int> sel(inst.k);
  std::iota(sel.begin(), sel.end(), 0);
  while (true) {
    ++best.nodes;
    const double obj = milp_objective(inst, sel);
    if (better(obj, sel, best.objective, best.selected, have)) {
      best.objective = obj;
      best.selected = sel;
      have = true;
    }
    int pos = inst.k - 1;
    while (pos >= 0 && sel[pos] == inst.n - inst.k + pos) --pos;
    if (pos < 0) break;
    ++sel[pos];
    for (int q = pos + 1; q < inst.k; ++q) sel[q] = sel[q - 1] + 1;
  }
  return best;
}

MilpSolution milp_solve(const MilpInstance& inst) {
  inst.validate();
  const int m = inst.m, n = inst.n, k = inst.k;
  const auto totals = row_totals(inst);

  // lo[j][d][r] / hi[j][d][r]: smallest / largest sum of r entries of row j
  // among columns d..n-1.
  const auto idx = [n, k](int j, int d, int r) {
    return (static_cast<std::size_t>(j) * (n + 1) + d) * (k + 1) + r;
  };
  std::vector<double> lo(static_cast<std::size_t>(m) * (n + 1) * (k + 1), 0.0), hi(lo.size(), 0.0);
  for (int j = 0; j < m; ++j) {
    for (int d = 0; d < n; ++d) {
      std::vector<double> tail;
      for (int i = d; i < n; ++i) tail.push_back(inst.at(j, i));
      std::sort(tail.begin(), tail.end());
      double a = 0.0, b = 0.0;
      for (int r = 1; r <= k && r <= static_cast<int>(tail.size()); ++r) {
        a += tail[r - 1];
        b += tail[tail.size() - r];
        lo[idx(j, d, r)] = a;
        hi[idx(j, d, r)] = b;
      }
    }
  }

  struct Node {
    double bound;
    int depth;  // next column to decide
    std::vector<int> chosen;
    std::vector<double> sums;
  };
  auto bound_of = [&](const Node& node) {
    const int r = k - static_cast<int>(node.chosen.size());
    double b = 0.0;
    for (int j = 0; j < m; ++j) {
      const double a = n * (node.sums[j] + lo[idx(j, node.depth, r)]) - k * totals[j];
      const double c = n * (node.sums[j] + hi[idx(j, node.depth, r)]) - k * totals[j];
      if (a > 0.0) {
        b += a;
      } else if (c < 0.0) {
        b += -c;
      }
    }
    return n > 0 ? b / n : 0.0;
  };
  // Min-heap on bound; among equal bounds prefer deeper nodes, then the
  // lexicographically smaller partial selection.
  auto worse = [](const Node& x, const Node& y) {
    if (x.bound != y.bound) return x.bound > y.bound;
    if (x.depth != y.depth) return x.depth < y.depth;
    return x.chosen > y.chosen;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

  MilpSolution best;
  bool have = false;
  // Rounding in the bound is covered by `slack`; objectives are never negative.
  auto slack = [&] { return 1e-9 * (1.0 + std::abs(best.objective)); };
  // Whether some completion of `chosen` (deciding columns from `depth` on)
  // could sort before the incumbent selection.
  auto may_precede = [&](const std::vector<int>& chosen, int depth) {
    const auto& inc = best.selected;
    for (std::size_t q = 0; q < chosen.size(); ++q) {
      if (q >= inc.size()) return false;
      if (chosen[q] != inc[q]) return chosen[q] < inc[q];
    }
    return chosen.size() < inc.size() && inc[chosen.size()] >= depth;
  };
  auto keep = [&](double bound, const std::vector<int>& chosen, int depth) {
    if (!have) return true;
    if (bound > best.objective + slack()) return false;
    if (may_precede(chosen, depth)) return true;
    return best.objective > std::max(0.0, bound - slack());
  };

  Node root{0.0, 0, {}, std::vector<double>(m, 0.0)};
  root.bound = bound_of(root);
  open.push(std::move(root));
  while (!open.empty()) {
    Node node = std::move(const_cast<Node&>(open.top()));
    open.pop();
    if (have && node.bound > best.objective + slack()) break;
    if (!keep(node.bound, node.chosen, node.depth)) continue;
    ++best.nodes;
    const int r = k - static_cast<int>(node.chosen.size());
    if (r == 0) {
      const double obj = milp_objective(inst, node.chosen);
      if (better(obj, node.chosen, best.objective, best.selected, have)) {
        best.objective = obj;
        best.selected = node.chosen;
        have = true;
      }
      continue;
    }
    if (n - node.depth < r) continue;
    const int col = node.depth;
    if (n - col - 1 >= r) {
      Node out{0.0, col + 1, node.chosen, node.sums};
      out.bound = bound_of(out);
      if (keep(out.bound, out.chosen, out.depth)) open.push(std::move(out));
    }
    Node in{0.0, col + 1, std::move(node.chosen), std::move(node.sums)};
    in.chosen.push_back(col);
    for (int j = 0; j < m; ++j) in.sums[j] += inst.at(j, col);
    in.bound = bound_of(in);
    if (keep(in.bound, in.chosen, in.depth)) open.push(std::move(in));
  }
  return best;
}

MilpSolution MilpCache::solve(const MilpInstance& inst) {
  auto key = std::make_tuple(inst.m, inst.n, inst.k, inst.s);
  {
    std::lock_guard lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++hits_;
      return it->second;
    }
  }
  auto sol = milp_solve(inst);
  std::lock_guard lock(mu_);
  memo_.emplace(std::move(key), sol);
  return sol;
}

std::size_t MilpCache::size() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

std::uint64_t MilpCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

BattleState complete_state(const SideView& view, const UsageStats& stats, const MatchupMatrix& matrix, const Dex& dex,
                           MilpCache* cache) {
  const int side = view.side, opp = 1 - side;
  BattleState s;
  s.turn = static_cast<std::uint16_t>(view.turn);
  s.weather = view.weather;
  s.weather_turns = static_cast<std::uint8_t>(view.weather_turns);
  s.sides[side] = view.own;
  auto& theirs = s.sides[opp];
  theirs.team_size = static_cast<std::uint8_t>(view.opp_team_size);
  theirs.active = static_cast<std::uint8_t>(view.opp_active);
  theirs.tailwind_turns = static_cast<std::uint8_t>(view.opp_tailwind_turns);
  theirs.toxic_spikes = static_cast<std::uint8_t>(view.opp_toxic_spikes);

  std::vector<int> unseen;
  std::vector<bool> revealed_species(dex.species_count(), false);
  for (int i = 0; i < view.opp_team_size; ++i) {
    const auto& o = view.opp[i];
    if (!o.seen) {
      unseen.push_back(i);
      continue;
    }
    revealed_species[o.species.value] = true;
    PartialPokemon partial;
    partial.species = o.species;
    partial.level = o.level;
    for (const auto& [mv, uses] : o.moves) partial.moves.push_back(mv);
    partial.ability = o.ability;
    partial.item = o.item;
    auto p = make_pokemon(dex, impute_known_species(partial, stats, dex));
    if (o.item_consumed) p.item = kNoItem;
    p.hp = o.hp_percent == 0
               ? 0
               : static_cast<std::uint16_t>(std::clamp<long>(std::lround(o.hp_percent * p.stats.hp / 100.0), 1, p.stats.hp));
    p.status = o.status;
    for (const auto& [mv, uses] : o.moves) {
      for (int q = 0; q < p.move_count; ++q) {
        if (p.moves[q].move == mv) p.moves[q].pp = static_cast<std::uint8_t>(std::max(0, p.moves[q].pp - uses));
      }
    }
    if (i == view.opp_active) p.stages = view.opp_stages;
    theirs.team[i] = p;
  }

  if (!unseen.empty()) {
    if (matrix.n() != static_cast<int>(dex.species_count())) {
      throw std::invalid_argument("complete_state: matchup matrix does not match the dex");
    }
    std::vector<int> columns;
    for (int c = 0; c < matrix.n(); ++c) {
      if (!revealed_species[c]) columns.push_back(c);
    }
    MilpInstance inst;
    inst.n = static_cast<int>(columns.size());
    inst.k = static_cast<int>(unseen.size());
    for (int i = 0; i < view.own.team_size; ++i) {
      const auto& p = view.own.team[i];
      if (!p.alive()) continue;
      ++inst.m;
      for (int c : columns) inst.s.push_back(matrix.at(p.species.value, c));
    }
    if (inst.m == 0) throw std::invalid_argument("complete_state: no alive Pokemon on our side");
    const auto sol = cache ? cache->solve(inst) : milp_solve(inst);
    for (std::size_t q = 0; q < unseen.size(); ++q) {
      const SpeciesId sp{static_cast<std::uint16_t>(columns[sol.selected[q]])};
      theirs.team[unseen[q]] = make_pokemon(dex, canonical_build(dex, sp));
    }
  }
  if (view.winner) s.winner = static_cast<std::int8_t>(*view.winner);
  validate_state(dex, s);
  return s;
}

}  // namespace duelist
