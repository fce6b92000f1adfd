#pragma once

#include <vector>

#include "duelist/engine.hpp"

namespace duelist {

struct ChanceConfig {
  int n = 8;                  // grid size per side
  int full_chance_depth = 1;  // turns from the root that enumerate the full grid
  int min_n = 8;
  int max_n = 20;

  // Throws std::invalid_argument when n lies outside [min_n, max_n].
  void validate() const;
};

// Midpoints (k + 0.5) / n of n equiprobable bins over [0, 1).
std::vector<double> grid(int n);

struct ChanceChild {
  BattleState state;
  double weight = 1.0;
  double r0 = 0.5;
  double r1 = 0.5;
};

// Children of one joint action. `turns_from_root` is 1 for the turn played
// from the root. Within the full-chance depth every (r0, r1) grid pair gives
// a child of weight 1/n^2; beyond it a single average-luck child.
std::vector<ChanceChild> expand_turn(const Dex& dex, const BattleState& state, const Action& a0,
                                     const Action& a1, int turns_from_root, const ChanceConfig& cfg);

// Number of children expand_turn produces for one joint action.
int chance_children(int turns_from_root, const ChanceConfig& cfg);

// Raw (state, joint action) expansions of a turn before any merging.
long raw_expansions(int actions0, int actions1, int turns_from_root, const ChanceConfig& cfg);

}  // namespace duelist
