#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "duelist/engine.hpp"

namespace duelist {

// Magnitude returned for decided states; dominates any pair mean.
inline constexpr double kLossSentinel = 1e6;

struct ScoreParams {
  double alive_bonus = 1.0;  // B
  int one_vs_one_depth = 1;  // turns of lookahead inside a one-vs-one sub-battle

  void validate() const;
  bool operator==(const ScoreParams&) const = default;
};

// hp fraction plus B when the Pokemon is still standing.
double score_pokemon(const Pokemon& p, const ScoreParams& params);

// Value of `ours` against `theirs` alone on a fresh field under average luck.
// Each orientation is a pure maximin lookahead of params.one_vs_one_depth
// turns with leaf value score(ours) - score(theirs); the result averages
// v(ours as side 0) and -v(theirs as side 0) so the value is exactly
// antisymmetric. Throws std::invalid_argument for a fainted input.
double one_vs_one_value(const Dex& dex, const Pokemon& ours, const Pokemon& theirs, const ScoreParams& params);

// Optional relative weight for a (ours, theirs) pair; uniform when empty.
using PairWeight = std::function<double(const Pokemon& ours, const Pokemon& theirs)>;

// Mean pair value over alive (ours x theirs) from `side`'s point of view;
// -kLossSentinel when `side` has nothing left, +kLossSentinel when the
// opponent has nothing left.
double team_balance_score(const Dex& dex, const BattleState& state, int side, const ScoreParams& params,
                          const PairWeight& weight = {});

// Stable 64-bit fingerprint of a Pokemon's instance state. Move pp enters as
// min(pp, pp_cap): a lookahead of d turns cannot tell pp values >= d apart,
// so the evaluator caches with pp_cap = one-vs-one-depth.
std::uint64_t fingerprint(const Pokemon& p, int pp_cap = 255);

// Caching front end used by the search. Not thread safe: one per worker.
class Evaluator {
 public:
  Evaluator(const Dex& dex, ScoreParams params, std::size_t max_entries = 1u << 20);

  double one_vs_one(const Pokemon& ours, const Pokemon& theirs);
  double team_balance(const BattleState& state, int side);

  const ScoreParams& params() const { return params_; }
  std::uint64_t pair_evaluations() const { return computed_; }
  std::uint64_t cache_hits() const { return hits_; }
  void clear() { cache_.clear(); }

 private:
  double lookup(std::uint64_t fa, std::uint64_t fb, const Pokemon& a, const Pokemon& b);

  const Dex* dex_;
  ScoreParams params_;
  std::size_t max_entries_;
  absl::flat_hash_map<std::pair<std::uint64_t, std::uint64_t>, double> cache_;
  std::uint64_t computed_ = 0;
  std::uint64_t hits_ = 0;
};

// Canonical-build values of every species against every other.
class MatchupMatrix {
 public:
  MatchupMatrix() = default;
  MatchupMatrix(std::string dex_hash, int n, ScoreParams params, std::vector<double> cells);

  int n() const { return n_; }
  double at(int i, int j) const { return cells_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::string& dex_hash() const { return dex_hash_; }
  const ScoreParams& params() const { return params_; }
  const std::vector<double>& cells() const { return cells_; }

  // JSON {"dex-hash", "n", "params", "rows"}.
  std::string to_json() const;
  static MatchupMatrix from_json(const std::string& text, const std::string& origin);
  void save(const std::filesystem::path& file) const;
  static MatchupMatrix load(const std::filesystem::path& file);

  bool operator==(const MatchupMatrix&) const = default;

 private:
  std::string dex_hash_;
  int n_ = 0;
  ScoreParams params_;
  std::vector<double> cells_;
};

// Rows are split across `threads` workers; every cell is independent.
MatchupMatrix precompute_matchup_matrix(const Dex& dex, const ScoreParams& params, int threads = 1);

}  // namespace duelist
