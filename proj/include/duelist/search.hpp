#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duelist/chance.hpp"
#include "duelist/evaluator.hpp"
#include "duelist/opponent_model.hpp"
#include "duelist/payoff.hpp"
#include "duelist/tt.hpp"

namespace duelist {

struct SearchConfig {
  int depth = 2;  // full turns of lookahead
  ChanceConfig chance;
  ScoreParams eval;
  double time_budget = 5.0;  // seconds; infinity disables the deadline
  bool pruning = true;
  bool use_tt = true;
  // When false, internal nodes and the root use pure maximin (ablation mode).
  bool use_opponent_model = true;
  int threads = 1;

  void validate() const;
};

// Static dominance between two states, from `side`'s point of view.
enum class Dominance { Incomparable, Equal, FirstBetter, SecondBetter };

// Compares two states that must agree on everything except the components
// covered by the rule list below; anything else differing -> Incomparable.
//
// Rule list (each rule names a component and the direction that is better
// for `side`):
//   1. own Pokemon hp: higher
//   2. own move pp: higher
//   3. own stat stages: higher
//   4. opposing Pokemon hp: lower
//   5. opposing move pp: lower
//   6. opposing stat stages: lower
//   7. status: a Pokemon with a status is worse off for its owner than the
//      same Pokemon without one; two different statuses are not ordered
// Weather, side conditions, items, active slots, turn and everything not
// listed must be equal.
Dominance compare_states(const BattleState& a, const BattleState& b, int side);

// Indices of `children` that survive: a child is removed when another child
// dominates it strictly, and of identical children only the first is kept.
std::vector<int> prune_states(const std::vector<BattleState>& children, int side);

struct SearchStats {
  std::uint64_t nodes = 0;         // expanded nodes, leaves included
  std::uint64_t leaves = 0;
  std::uint64_t tt_hits = 0;
  std::uint64_t chance_children = 0;
  std::uint64_t pruned_rows = 0;   // our actions removed by state dominance
  std::uint64_t pruned_cols = 0;
  int depth_completed = 0;
  bool timed_out = false;
  double seconds = 0.0;

  void add(const SearchStats& o);
};

struct SearchResult {
  Action action;
  PayoffMatrix root;             // evaluated root matrix at the deepest completed depth
  std::vector<double> prediction;  // opponent distribution over root.theirs
  int root_column = -1;          // j* chosen by respond (or the maximin reply)
  double value = 0.0;
  SearchStats stats;
};

class SearchTimeout : public std::runtime_error {
 public:
  SearchTimeout() : std::runtime_error("search deadline passed") {}
};

// Simultaneous-move lookahead for one side of a fully specified state.
// Holds the caches that persist across decisions of one battle.
class Searcher {
 public:
  Searcher(const Dex& dex, SearchConfig cfg, std::shared_ptr<TranspositionTable> tt = nullptr);

  // Iterative deepening up to cfg.depth within cfg.time_budget. `model` may be
  // null, which predicts uniformly.
  SearchResult search(const BattleState& state, int side, const OpponentModel* model);

  // Root payoff matrix at exactly `depth`, without a deadline.
  PayoffMatrix root_matrix(const BattleState& state, int side, const OpponentModel* model, int depth,
                           SearchStats* stats = nullptr);

  const SearchConfig& config() const { return cfg_; }
  TranspositionTable* table() { return tt_.get(); }

 private:
  friend class SearchRun;
  PayoffMatrix parallel_root(const BattleState& state, int side, const OpponentModel* model, int depth,
                             std::chrono::steady_clock::time_point deadline, std::vector<ActionKey>& keys,
                             SearchStats& stats);
  const Dex* dex_;
  SearchConfig cfg_;
  std::shared_ptr<TranspositionTable> tt_;
  std::vector<std::unique_ptr<Evaluator>> evaluators_;
};

// Selects the node value (and choice) from an evaluated matrix according to
// the configuration: optional dominance elimination, then respond against the
// model's prediction or pure maximin.
struct NodeChoice {
  int row = 0;
  int column = -1;
  double value = 0.0;
  std::vector<double> prediction;
};
NodeChoice choose_from_matrix(const PayoffMatrix& m, const std::vector<ActionKey>& their_keys,
                              const OpponentModel* model, const SearchConfig& cfg);

}  // namespace duelist
