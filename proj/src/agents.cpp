#include "duelist/agents.hpp"

#include <stdexcept>

#include <spdlog/spdlog.h>

namespace duelist {

using nlohmann::json;

namespace {

constexpr std::uint16_t kStruggleId = 0xFFFF;

Pokemon visible_opponent(const Dex& dex, const SideView& view) {
  const auto& o = view.opp.at(view.opp_active);
  Build b = canonical_build(dex, o.species);
  b.level = o.level;
  if (o.ability) b.ability = *o.ability;
  if (o.item && !o.item_consumed) b.item = *o.item;
  auto p = make_pokemon(dex, b);
  p.stages = view.opp_stages;
  return p;
}

int average_luck_damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, int slot,
                        const BattleState& ctx) {
  if (slot == kStruggleSlot) return struggle_damage(dex, attacker, defender, 0.5);
  const auto& move = dex.move(attacker.moves[slot].move);
  if (move.category == Category::Status || move.power <= 0) return 0;
  if (move.accuracy < 1.0 && 0.5 >= move.accuracy) return 0;
  return damage(dex, attacker, defender, move, 0.5, ctx);
}

int best_damage(const Dex& dex, const Pokemon& attacker, const Pokemon& defender, const BattleState& ctx) {
  int best = 0;
  for (int m = 0; m < attacker.move_count; ++m) {
    if (attacker.moves[m].pp == 0) continue;
    best = std::max(best, average_luck_damage(dex, attacker, defender, m, ctx));
  }
  return best;
}

json matrix_json(const PayoffMatrix& m) {
  json ours = json::array(), theirs = json::array(), rows = json::array();
  for (const auto& a : m.ours) ours.push_back(to_string(a));
  for (const auto& a : m.theirs) theirs.push_back(to_string(a));
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return {{"ours", ours}, {"theirs", theirs}, {"values", rows}};
}

}  // namespace

json to_json(const Decision& d) {
  return {{"matrix", matrix_json(d.matrix)}, {"prediction", d.prediction}, {"row", d.row},
          {"column", d.column},              {"value", d.value},           {"depth", d.depth},
          {"nodes", d.nodes}};
}

Action RandomAgent::choose(const SideView& view) {
  if (view.legal.empty()) throw StateError("random agent: nothing to choose from");
  std::uniform_int_distribution<std::size_t> pick(0, view.legal.size() - 1);
  return view.legal[pick(rng_)];
}

Action GreedyAgent::choose(const SideView& view) {
  if (view.legal.empty()) throw StateError("greedy agent: nothing to choose from");
  const auto& dex = *dex_;
  BattleState ctx;
  ctx.weather = view.weather;
  ctx.weather_turns = static_cast<std::uint8_t>(view.weather_turns);
  ctx.sides[view.side] = view.own;
  auto& theirs = ctx.sides[1 - view.side];
  theirs.team_size = 1;
  theirs.team[0] = visible_opponent(dex, view);

  const auto& mine = view.own.active_pokemon();
  Action best = view.legal.front();
  int best_value = -1;
  for (const auto& a : view.legal) {
    int v = -1;
    if (view.request == RequestKind::Replacement && a.is_switch()) {
      v = best_damage(dex, view.own.team[a.index], theirs.team[0], ctx);
    } else if (a.is_move()) {
      v = average_luck_damage(dex, mine, theirs.team[0], a.index, ctx);
    }
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

Action ForfeitAgent::choose(const SideView&) { throw std::runtime_error("forfeit agent always forfeits"); }

std::optional<ActionKey> observed_action(const EventLog& events, int side) {
  const int opp = 1 - side;
  for (const auto& e : events) {
    if (e.side != opp) continue;
    if (e.kind == EventKind::FullyParalyzed) return std::nullopt;
    if (e.kind == EventKind::SwitchIn) return ActionKey{ActionKey::Kind::Switch, e.id};
    if (e.kind == EventKind::UseMove) {
      if (e.id == kStruggleId) return ActionKey{ActionKey::Kind::Struggle, 0};
      return ActionKey{ActionKey::Kind::Move, e.id};
    }
  }
  return std::nullopt;
}

SearchAgent::SearchAgent(const Dex& dex, SearchConfig cfg, SearchResources resources,
                         std::shared_ptr<TranspositionTable> tt)
    : dex_(&dex), res_(std::move(resources)), searcher_(dex, std::move(cfg), std::move(tt)) {
  if (!res_.matrix) throw std::invalid_argument("search agent needs a matchup matrix");
  if (res_.matrix->n() != static_cast<int>(dex.species_count())) {
    throw std::invalid_argument("search agent: matchup matrix does not match the dex");
  }
}

std::string SearchAgent::name() const { return "search-d" + std::to_string(searcher_.config().depth); }

Action SearchAgent::choose(const SideView& view) {
  if (view.legal.empty()) throw StateError("search agent: nothing to choose from");
  static const UsageStats kNoUsage;
  side_ = view.side;
  const auto state = complete_state(view, res_.usage ? *res_.usage : kNoUsage, *res_.matrix, *dex_, res_.milp.get());
  observable_ = !state.replacement_pending();
  auto r = searcher_.search(state, view.side, &model_);
  decision_.reset();
  keys_.clear();
  if (r.stats.depth_completed > 0) {
    Decision d;
    d.matrix = std::move(r.root);
    d.prediction = std::move(r.prediction);
    d.column = r.root_column;
    d.value = r.value;
    d.depth = r.stats.depth_completed;
    d.nodes = r.stats.nodes;
    for (int i = 0; i < d.matrix.rows(); ++i) {
      if (d.matrix.ours[i] == r.action) d.row = i;
    }
    keys_ = action_keys(state, 1 - view.side, d.matrix.theirs);
    decision_ = std::move(d);
  }
  return r.action;
}

void SearchAgent::observe(const Action&, const EventLog& events) {
  if (!observable_) return;
  observable_ = false;
  const auto key = observed_action(events, side_);
  if (!decision_ || !key || decision_->matrix.cols() < 2) {
    ++skipped_;
    return;
  }
  int taken = -1;
  for (std::size_t j = 0; j < keys_.size(); ++j) {
    if (keys_[j] == *key) taken = static_cast<int>(j);
  }
  if (taken < 0) {
    ++skipped_;
    return;
  }
  model_.observe(decision_->matrix, keys_, decision_->row, taken);
  ++observed_;
}

AgentSpec random_agent_spec() {
  return {"random", [](std::uint64_t seed) { return std::make_unique<RandomAgent>(seed); }};
}

AgentSpec greedy_agent_spec(const Dex& dex) {
  return {"greedy", [&dex](std::uint64_t) { return std::make_unique<GreedyAgent>(dex); }};
}

AgentSpec forfeit_agent_spec() {
  return {"forfeit", [](std::uint64_t) { return std::make_unique<ForfeitAgent>(); }};
}

AgentSpec search_agent_spec(const Dex& dex, SearchConfig cfg, SearchResources resources, std::string name) {
  cfg.validate();
  if (!resources.milp) resources.milp = std::make_shared<MilpCache>();
  if (name.empty()) name = "search-d" + std::to_string(cfg.depth);
  return {std::move(name), [&dex, cfg, resources](std::uint64_t) {
            return std::make_unique<SearchAgent>(dex, cfg, resources);
          }};
}

AgentSpec agent_spec_from_name(const std::string& name, const Dex& dex, const SearchConfig& search,
                               const SearchResources& resources) {
  if (name == "random") return random_agent_spec();
  if (name == "greedy") return greedy_agent_spec(dex);
  if (name == "forfeit") return forfeit_agent_spec();
  if (name == "search" || name.rfind("search:", 0) == 0) {
    auto cfg = search;
    if (name != "search") {
      const auto depth = name.substr(7);
      std::size_t used = 0;
      try {
        cfg.depth = std::stoi(depth, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != depth.size()) throw std::invalid_argument("bad search depth in '" + name + "'");
    }
    if (!resources.matrix) throw std::invalid_argument("search agents need a matchup matrix");
    return search_agent_spec(dex, cfg, resources, name == "search" ? "" : "search-d" + std::to_string(cfg.depth));
  }
  throw std::invalid_argument("unknown agent '" + name + "' (random, greedy, search, search:D)");
}

}  // namespace duelist
