#include "duelist/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "duelist/hash.hpp"

namespace duelist {

void SearchConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("lookahead depth must be >= 1");
  if (!(time_budget > 0.0)) throw std::invalid_argument("time budget must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  chance.validate();
  eval.validate();
}

void SearchStats::add(const SearchStats& o) {
  nodes += o.nodes;
  leaves += o.leaves;
  tt_hits += o.tt_hits;
  chance_children += o.chance_children;
  pruned_rows += o.pruned_rows;
  pruned_cols += o.pruned_cols;
}

namespace {

// Running comparison: +1 when `a` is better for the owner so far, -1 when
// `b` is, 0 while equal; becomes kClash once both directions have appeared.
constexpr int kClash = 2;

void fold(int& acc, int cmp) {
  if (cmp == 0 || acc == kClash) return;
  if (acc == 0) {
    acc = cmp;
  } else if (acc != cmp) {
    acc = kClash;
  }
}

int order(int a, int b) { return (a > b) - (a < b); }

// Folds the rule-list components of one Pokemon; `mine` says whether the
// Pokemon belongs to the side we judge for. Returns false when a component
// outside the rule list differs.
bool fold_pokemon(const Pokemon& a, const Pokemon& b, bool mine, int& acc) {
  if (a.species != b.species || a.level != b.level || a.move_count != b.move_count || a.ability != b.ability ||
      a.item != b.item) {
    return false;
  }
  const int sign = mine ? 1 : -1;
  fold(acc, sign * order(a.hp, b.hp));  // rules 1 and 4
  for (int m = 0; m < a.move_count; ++m) {
    if (a.moves[m].move != b.moves[m].move) return false;
    fold(acc, sign * order(a.moves[m].pp, b.moves[m].pp));  // rules 2 and 5
  }
  for (int s = 0; s < kStageStats; ++s) fold(acc, sign * order(a.stages[s], b.stages[s]));  // rules 3 and 6
  if (a.status != b.status) {
    // Rule 7: a status only ever hurts its holder, but two different
    // statuses are not ordered.
    if (a.status != Status::None && b.status != Status::None) return false;
    fold(acc, sign * (a.status == Status::None ? 1 : -1));
  }
  return true;
}

}  // namespace

Dominance compare_states(const BattleState& a, const BattleState& b, int side) {
  if (a.weather != b.weather || a.weather_turns != b.weather_turns || a.turn != b.turn || a.winner != b.winner) {
    return Dominance::Incomparable;
  }
  int acc = 0;
  for (int sd = 0; sd < 2; ++sd) {
    const auto& x = a.sides[sd];
    const auto& y = b.sides[sd];
    if (x.team_size != y.team_size || x.active != y.active || x.tailwind_turns != y.tailwind_turns ||
        x.toxic_spikes != y.toxic_spikes) {
      return Dominance::Incomparable;
    }
    for (int i = 0; i < x.team_size; ++i) {
      if (!fold_pokemon(x.team[i], y.team[i], sd == side, acc)) return Dominance::Incomparable;
    }
    if (acc == kClash) return Dominance::Incomparable;
  }
  if (acc == 0) return Dominance::Equal;
  return acc > 0 ? Dominance::FirstBetter : Dominance::SecondBetter;
}

std::vector<int> prune_states(const std::vector<BattleState>& children, int side) {
  const int n = static_cast<int>(children.size());
  std::vector<bool> removed(n, false);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n && !removed[a]; ++b) {
      if (a == b || removed[b]) continue;
      const auto d = compare_states(children[b], children[a], side);
      if (d == Dominance::FirstBetter || (d == Dominance::Equal && b < a)) removed[a] = true;
    }
  }
  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (!removed[i]) kept.push_back(i);
  }
  return kept;
}

NodeChoice choose_from_matrix(const PayoffMatrix& m, const std::vector<ActionKey>& their_keys,
                              const OpponentModel* model, const SearchConfig& cfg) {
  std::vector<int> rows, cols;
  const PayoffMatrix* use = &m;
  ReducedMatrix reduced;
  if (cfg.pruning) {
    reduced = eliminate_dominated(m);
    use = &reduced.matrix;
    rows = reduced.rows;
    cols = reduced.cols;
  } else {
    for (int i = 0; i < m.rows(); ++i) rows.push_back(i);
    for (int j = 0; j < m.cols(); ++j) cols.push_back(j);
  }
  NodeChoice out;
  if (cfg.use_opponent_model) {
    std::vector<ActionKey> keys;
    for (int c : cols) keys.push_back(their_keys[c]);
    std::vector<double> p = model ? model->predict(keys) : std::vector<double>(keys.size(), 1.0 / keys.size());
    const auto r = respond(*use, p);
    out.row = rows[r.row];
    out.column = cols[r.column];
    out.value = use->at(r.row, r.column);
    out.prediction.assign(m.cols(), 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) out.prediction[cols[k]] = p[k];
  } else {
    const auto mm = pure_maximin(*use);
    out.row = rows[mm.row];
    out.value = mm.value;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (use->at(mm.row, static_cast<int>(k)) < worst) {
        worst = use->at(mm.row, static_cast<int>(k));
        out.column = cols[k];
      }
    }
  }
  return out;
}

// One decision's worth of search state.
class SearchRun {
 public:
  SearchRun(Searcher& owner, int side, const OpponentModel* model, Evaluator& eval,
            std::optional<std::chrono::steady_clock::time_point> deadline)
      : s_(owner), side_(side), model_(model), eval_(eval), deadline_(deadline) {
    Hasher h(0x5a17);
    const auto& c = owner.cfg_;
    h.add(side);
    h.add(c.chance.n);
    h.add(c.chance.full_chance_depth);
    h.add(c.eval.alive_bonus);
    h.add(c.eval.one_vs_one_depth);
    h.add(c.pruning);
    h.add(c.use_opponent_model);
    h.add(c.use_opponent_model && model ? model->fingerprint() : 0);
    salt_ = h.digest();
  }

  SearchStats stats;

  // Root or internal node before its cells are valued: children expanded,
  // dominated rows and columns already dropped.
  struct Prepared {
    PayoffMatrix matrix;
    std::vector<ActionKey> keys;
    std::vector<std::vector<ChanceChild>> cells;  // row-major over the kept matrix
    int next_depth = 0;
    int next_turn = 0;
  };

  Prepared prepare(const BattleState& s, int depth_left, int turn_index) {
    const int opp = 1 - side_;
    auto ours = legal_actions(*s_.dex_, s, side_);
    auto theirs = legal_actions(*s_.dex_, s, opp);
    const bool replacement = s.replacement_pending();
    Prepared p;
    p.next_depth = replacement ? depth_left : depth_left - 1;
    p.next_turn = replacement ? turn_index : turn_index + 1;
    const int rows = static_cast<int>(ours.size()), cols = static_cast<int>(theirs.size());

    std::vector<std::vector<ChanceChild>> kids(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const Action& a0 = side_ == 0 ? ours[i] : theirs[j];
        const Action& a1 = side_ == 0 ? theirs[j] : ours[i];
        auto& slot = kids[static_cast<std::size_t>(i) * cols + j];
        if (replacement) {
          slot.resize(1);
          auto luck = average_luck_source();
          resolve_turn_into(*s_.dex_, s, a0, a1, luck, slot[0].state, nullptr);
        } else {
          slot = expand_turn(*s_.dex_, s, a0, a1, turn_index, s_.cfg_.chance);
        }
        stats.chance_children += slot.size();
      }
    }

    std::vector<int> keep_rows, keep_cols;
    if (s_.cfg_.pruning) {
      keep_rows = prune_axis(kids, rows, cols, true);
      keep_cols = prune_axis(kids, rows, cols, false);
      stats.pruned_rows += rows - keep_rows.size();
      stats.pruned_cols += cols - keep_cols.size();
    } else {
      for (int i = 0; i < rows; ++i) keep_rows.push_back(i);
      for (int j = 0; j < cols; ++j) keep_cols.push_back(j);
    }

    std::vector<Action> kept_ours, kept_theirs;
    for (int i : keep_rows) kept_ours.push_back(ours[i]);
    for (int j : keep_cols) {
      kept_theirs.push_back(theirs[j]);
      p.keys.push_back(action_key(s, opp, theirs[j]));
    }
    p.matrix = PayoffMatrix(std::move(kept_ours), std::move(kept_theirs));
    for (int i : keep_rows) {
      for (int j : keep_cols) p.cells.push_back(std::move(kids[static_cast<std::size_t>(i) * cols + j]));
    }
    return p;
  }

  double cell_value(Prepared& p, std::size_t cell) { return expected_value(p.cells[cell], p.next_depth, p.next_turn); }

  void fill(Prepared& p) {
    for (std::size_t c = 0; c < p.cells.size(); ++c) {
      p.matrix.values[c] = cell_value(p, c);
    }
  }

  // Evaluated matrix of the node (pruned rows/columns dropped).
  PayoffMatrix matrix(const BattleState& s, int depth_left, int turn_index, std::vector<ActionKey>* keys_out) {
    auto p = prepare(s, depth_left, turn_index);
    fill(p);
    if (keys_out) *keys_out = std::move(p.keys);
    return std::move(p.matrix);
  }

  double value(const BattleState& s, int depth_left, int turn_index) {
    if (deadline_ && (++ticks_ & 15) == 0 && std::chrono::steady_clock::now() > *deadline_) throw SearchTimeout();
    if (s.finished() || depth_left == 0) {
      ++stats.nodes;
      ++stats.leaves;
      const double v = eval_.team_balance(s, side_);
      // A result reached with lookahead to spare is worth slightly more (or,
      // for a loss, less) than the same result later on.
      if (s.finished()) return v + (s.winner == side_ ? depth_left : -depth_left);
      return v;
    }
    const bool use_tt = s_.cfg_.use_tt && s_.tt_;
    TTKey key;
    if (use_tt) {
      key = state_key(s, salt_ ^ mix64(static_cast<std::uint64_t>(chance_turns_left(depth_left, turn_index))));
      if (auto v = s_.tt_->lookup(key, depth_left)) {
        ++stats.tt_hits;
        return *v;
      }
    }
    ++stats.nodes;
    auto p = prepare(s, depth_left, turn_index);
    fill(p);
    const double v = choose_from_matrix(p.matrix, p.keys, model_, s_.cfg_).value;
    if (use_tt) s_.tt_->store(key, depth_left, v);
    return v;
  }

 private:
  int chance_turns_left(int depth_left, int turn_index) const {
    return std::clamp(s_.cfg_.chance.full_chance_depth - turn_index + 1, 0, depth_left);
  }

  double expected_value(std::vector<ChanceChild>& slot, int depth, int turn_index) {
    const bool merge = s_.cfg_.use_tt && s_.tt_ && slot.size() > 1;
    double total = 0.0;
    if (!merge) {
      for (const auto& c : slot) total += c.weight * value(c.state, depth, turn_index);
      return total;
    }
    // Identical chance outcomes are valued once.
    std::vector<bool> done(slot.size(), false);
    for (std::size_t k = 0; k < slot.size(); ++k) {
      if (done[k]) continue;
      double w = slot[k].weight;
      for (std::size_t q = k + 1; q < slot.size(); ++q) {
        if (!done[q] && slot[q].state == slot[k].state) {
          w += slot[q].weight;
          done[q] = true;
        }
      }
      total += w * value(slot[k].state, depth, turn_index);
    }
    return total;
  }

  // Rows (ours) or columns (theirs) whose children are dominated for their
  // owner across every opposing action and chance outcome.
  std::vector<int> prune_axis(const std::vector<std::vector<ChanceChild>>& kids, int rows, int cols, bool ours) {
    const int n = ours ? rows : cols;
    const int other = ours ? cols : rows;
    const int owner = ours ? side_ : 1 - side_;
    auto cell = [&](int line, int k) -> const std::vector<ChanceChild>& {
      return ours ? kids[static_cast<std::size_t>(line) * cols + k] : kids[static_cast<std::size_t>(k) * cols + line];
    };
    // dominates(b, a): line b is at least as good as a everywhere, and either
    // strictly better somewhere or identical with b listed first.
    auto dominates = [&](int b, int a) {
      bool strict = false;
      for (int k = 0; k < other; ++k) {
        const auto& cb = cell(b, k);
        const auto& ca = cell(a, k);
        if (cb.size() != ca.size()) return false;
        for (std::size_t c = 0; c < cb.size(); ++c) {
          const auto d = compare_states(cb[c].state, ca[c].state, owner);
          if (d == Dominance::FirstBetter) {
            strict = true;
          } else if (d != Dominance::Equal) {
            return false;
          }
        }
      }
      return strict || b < a;
    };
    std::vector<bool> removed(n, false);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n && !removed[a]; ++b) {
        if (b != a && !removed[b] && dominates(b, a)) removed[a] = true;
      }
    }
    std::vector<int> kept;
    for (int i = 0; i < n; ++i) {
      if (!removed[i]) kept.push_back(i);
    }
    return kept;
  }

  Searcher& s_;
  int side_;
  const OpponentModel* model_;
  Evaluator& eval_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t salt_ = 0;
  std::uint32_t ticks_ = 0;
};

Searcher::Searcher(const Dex& dex, SearchConfig cfg, std::shared_ptr<TranspositionTable> tt)
    : dex_(&dex), cfg_(std::move(cfg)), tt_(std::move(tt)) {
  cfg_.validate();
  if (cfg_.use_tt && !tt_) tt_ = std::make_shared<TranspositionTable>();
  for (int t = 0; t < cfg_.threads; ++t) evaluators_.push_back(std::make_unique<Evaluator>(dex, cfg_.eval));
}

PayoffMatrix Searcher::root_matrix(const BattleState& state, int side, const OpponentModel* model, int depth,
                                   SearchStats* stats) {
  SearchRun run(*this, side, model, *evaluators_[0], std::nullopt);
  std::vector<ActionKey> keys;
  auto m = run.matrix(state, depth, 1, &keys);
  if (stats) stats->add(run.stats);
  return m;
}

SearchResult Searcher::search(const BattleState& state, int side, const OpponentModel* model) {
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = std::isinf(cfg_.time_budget)
                            ? std::chrono::steady_clock::time_point::max()
                            : start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                          std::chrono::duration<double>(cfg_.time_budget));
  auto legal = legal_actions(*dex_, state, side);
  if (legal.empty()) throw StateError("search: no legal action");
  SearchResult result;
  result.action = legal.front();
  if (legal.size() == 1) {
    result.stats.seconds = 0.0;
    return result;
  }
  for (int depth = 1; depth <= cfg_.depth; ++depth) {
    try {
      PayoffMatrix m;
      std::vector<ActionKey> keys;
      SearchStats iteration;
      if (cfg_.threads == 1) {
        SearchRun run(*this, side, model, *evaluators_[0], deadline);
        m = run.matrix(state, depth, 1, &keys);
        iteration = run.stats;
      } else {
        m = parallel_root(state, side, model, depth, deadline, keys, iteration);
      }
      const auto choice = choose_from_matrix(m, keys, model, cfg_);
      result.action = m.ours[choice.row];
      result.root = std::move(m);
      result.root_column = choice.column;
      result.prediction = choice.prediction;
      result.value = choice.value;
      result.stats.add(iteration);
      result.stats.depth_completed = depth;
    } catch (const SearchTimeout&) {
      result.stats.timed_out = true;
      break;
    }
  }
  result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.stats.depth_completed == 0) {
    spdlog::warn("search: time budget of {}s ran out before depth 1 finished; playing {}", cfg_.time_budget,
                 to_string(result.action));
  }
  return result;
}

PayoffMatrix Searcher::parallel_root(const BattleState& state, int side, const OpponentModel* model, int depth,
                                     std::chrono::steady_clock::time_point deadline, std::vector<ActionKey>& keys,
                                     SearchStats& stats) {
  SearchRun root(*this, side, model, *evaluators_[0], deadline);
  auto p = root.prepare(state, depth, 1);
  std::atomic<std::size_t> next{0};
  std::vector<SearchStats> worker_stats(evaluators_.size());
  std::vector<std::exception_ptr> errors(evaluators_.size());
  auto work = [&](std::size_t w) {
    SearchRun run(*this, side, model, *evaluators_[w], deadline);
    try {
      for (std::size_t c = next++; c < p.cells.size(); c = next++) p.matrix.values[c] = run.cell_value(p, c);
    } catch (...) {
      errors[w] = std::current_exception();
      next = p.cells.size();
    }
    worker_stats[w] = run.stats;
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < evaluators_.size(); ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  stats.add(root.stats);
  for (const auto& ws : worker_stats) stats.add(ws);
  keys = std::move(p.keys);
  return std::move(p.matrix);
}

}  // namespace duelist
