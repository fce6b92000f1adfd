#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "duelist/evaluator.hpp"
#include "duelist/view.hpp"

namespace duelist {

struct UsageSet {
  std::vector<MoveId> moves;  // sorted
  ItemId item = kNoItem;
  AbilityId ability;
  double freq = 0.0;
};

struct SpeciesUsage {
  std::map<AbilityId, double> abilities;
  std::map<ItemId, double> items;  // kNoItem for "no item"
  std::map<MoveId, double> moves;
  std::vector<UsageSet> sets;
};

// Per-species distributions. Each distribution (abilities, items, moves,
// sets) is normalized to sum to 1.
struct UsageStats {
  std::map<SpeciesId, SpeciesUsage> species;

  const SpeciesUsage* find(SpeciesId s) const;
};

// File format:
//   {"<species>": {"abilities": {"<ability>": freq}, "items": {"<item>|none": freq},
//                  "moves": {"<move>": freq},
//                  "sets": [{"moves": [...], "item": "<item>"|null, "ability": "<ability>", "freq": f}]}}
// Names resolve against the dex. Distributions that do not sum to 1 are
// renormalized with a warning. Throws LoadError on unknown names, illegal
// sets or non-positive totals.
UsageStats load_usage_stats(const std::filesystem::path& file, const Dex& dex);
UsageStats usage_stats_from_json(const std::string& text, const Dex& dex, const std::string& origin);
std::string usage_stats_to_json(const UsageStats& stats, const Dex& dex);

// Known properties of one opposing Pokemon.
struct PartialPokemon {
  SpeciesId species;
  int level = 100;
  std::vector<MoveId> moves;  // revealed, in order of first use
  std::optional<AbilityId> ability;
  std::optional<ItemId> item;  // kNoItem once known to hold nothing
};

// Most probable build consistent with `partial`: joint sets that contain all
// revealed moves and match a revealed item/ability are kept; ability, item
// and missing moves take their most frequent values among those sets (ties
// to the lowest id), falling back to marginals when no set survives. A
// species absent from the stats starts from its canonical build (warning).
Build impute_known_species(const PartialPokemon& partial, const UsageStats& stats, const Dex& dex);

// Selection of exactly k columns of an M x N score matrix s (rows are our
// Pokemon) minimizing
//   sum_j | sum_i x_i (s[j][i] - mean_j) |,   mean_j = (1/N) sum_t s[j][t].
// For an LP solver the absolute values linearize as: minimize sum_j u_j with
// u_j >= d_j and u_j >= -d_j, d_j = sum_i x_i (s[j][i] - mean_j),
// sum_i x_i = k, x binary.
struct MilpInstance {
  int m = 0;
  int n = 0;
  std::vector<double> s;  // row-major m x n
  int k = 0;

  double at(int j, int i) const { return s[static_cast<std::size_t>(j) * n + i]; }
  void validate() const;
};

struct MilpSolution {
  std::vector<int> selected;  // ascending
  double objective = 0.0;
  std::uint64_t nodes = 0;
};

// The objective of a selection, computed as
//   sum_j |N * sum_{i in sel} s[j][i] - k * sum_t s[j][t]| / N
// with both sums taken in index order, so k = N gives exactly 0.
double milp_objective(const MilpInstance& inst, const std::vector<int>& selected);

// Exact best-first branch and bound. Ties go to the lexicographically
// smallest selection. Throws std::invalid_argument when k > n.
MilpSolution milp_solve(const MilpInstance& inst);

// Exhaustive reference with the same objective and tie rule. Refuses
// (std::invalid_argument) when C(n, k) exceeds one million.
MilpSolution brute_force_oracle(const MilpInstance& inst);

// Memo of milp_solve keyed by the full instance. Thread safe.
class MilpCache {
 public:
  MilpSolution solve(const MilpInstance& inst);
  std::size_t size() const;
  std::uint64_t hits() const;

 private:
  mutable std::mutex mu_;
  std::map<std::tuple<int, int, int, std::vector<double>>, MilpSolution> memo_;
  std::uint64_t hits_ = 0;
};

// Concrete state for searching from `view`: our side as is, revealed
// opponents imputed, unseen slots filled with canonical builds of the
// species chosen by milp_solve over our alive rows of `matrix` (revealed
// species excluded from the columns).
BattleState complete_state(const SideView& view, const UsageStats& stats, const MatchupMatrix& matrix, const Dex& dex,
                           MilpCache* cache = nullptr);

}  // namespace duelist
