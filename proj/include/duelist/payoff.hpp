#pragma once

#include <functional>
#include <vector>

#include "duelist/state.hpp"

namespace duelist {

// Our actions x opponent actions; values are our payoff (zero-sum).
struct PayoffMatrix {
  std::vector<Action> ours;
  std::vector<Action> theirs;
  std::vector<double> values;  // row-major, ours.size() x theirs.size()

  PayoffMatrix() = default;
  PayoffMatrix(std::vector<Action> ours, std::vector<Action> theirs);
  PayoffMatrix(std::vector<Action> ours, std::vector<Action> theirs, std::vector<double> values);

  int rows() const { return static_cast<int>(ours.size()); }
  int cols() const { return static_cast<int>(theirs.size()); }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * theirs.size() + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * theirs.size() + j]; }

  // The same game seen by the opponent: rows and columns swapped, values negated.
  PayoffMatrix opponent_view() const;

  bool operator==(const PayoffMatrix&) const = default;
};

using JointValuer = std::function<double(int our_index, int their_index)>;

// values[i][j] = valuer(i, j). Throws std::invalid_argument on an empty axis.
PayoffMatrix build_payoff_matrix(std::vector<Action> ours, std::vector<Action> theirs, const JointValuer& valuer);

struct ReducedMatrix {
  PayoffMatrix matrix;
  std::vector<int> rows;  // original row index of each remaining row
  std::vector<int> cols;  // original column index of each remaining column
};

// Iterated elimination of strictly dominated rows (we maximize) and columns
// (the opponent minimizes) until a fixpoint.
ReducedMatrix eliminate_dominated(const PayoffMatrix& m);

struct MaximinChoice {
  int row = 0;
  double value = 0.0;
};

// Pure-strategy maximin; ties go to the lowest row.
MaximinChoice pure_maximin(const PayoffMatrix& m);

}  // namespace duelist
