#include "duelist/payoff.hpp"

#include <limits>
#include <stdexcept>

namespace duelist {

PayoffMatrix::PayoffMatrix(std::vector<Action> o, std::vector<Action> t)
    : ours(std::move(o)), theirs(std::move(t)), values(ours.size() * theirs.size(), 0.0) {}

PayoffMatrix::PayoffMatrix(std::vector<Action> o, std::vector<Action> t, std::vector<double> v)
    : ours(std::move(o)), theirs(std::move(t)), values(std::move(v)) {
  if (values.size() != ours.size() * theirs.size()) throw std::invalid_argument("payoff matrix shape mismatch");
}

PayoffMatrix PayoffMatrix::opponent_view() const {
  PayoffMatrix out(theirs, ours);
  for (int i = 0; i < rows(); ++i) {
    for (int j = 0; j < cols(); ++j) out.at(j, i) = -at(i, j);
  }
  return out;
}

PayoffMatrix build_payoff_matrix(std::vector<Action> ours, std::vector<Action> theirs, const JointValuer& valuer) {
  if (ours.empty() || theirs.empty()) throw std::invalid_argument("payoff matrix needs actions on both axes");
  PayoffMatrix m(std::move(ours), std::move(theirs));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) m.at(i, j) = valuer(i, j);
  }
  return m;
}

ReducedMatrix eliminate_dominated(const PayoffMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("eliminate_dominated on an empty matrix");
  std::vector<int> rows, cols;
  for (int i = 0; i < m.rows(); ++i) rows.push_back(i);
  for (int j = 0; j < m.cols(); ++j) cols.push_back(j);

  auto row_dominated = [&](int r) {
    for (int other : rows) {
      if (other == r) continue;
      bool strictly = true;
      for (int c : cols) {
        if (!(m.at(other, c) > m.at(r, c))) {
          strictly = false;
          break;
        }
      }
      if (strictly) return true;
    }
    return false;
  };
  auto col_dominated = [&](int c) {
    for (int other : cols) {
      if (other == c) continue;
      bool strictly = true;
      for (int r : rows) {
        if (!(m.at(r, other) < m.at(r, c))) {
          strictly = false;
          break;
        }
      }
      if (strictly) return true;
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < rows.size();) {
      if (rows.size() > 1 && row_dominated(rows[k])) {
        rows.erase(rows.begin() + static_cast<long>(k));
        changed = true;
      } else {
        ++k;
      }
    }
    for (std::size_t k = 0; k < cols.size();) {
      if (cols.size() > 1 && col_dominated(cols[k])) {
        cols.erase(cols.begin() + static_cast<long>(k));
        changed = true;
      } else {
        ++k;
      }
    }
  }

  ReducedMatrix out;
  out.rows = rows;
  out.cols = cols;
  std::vector<Action> ours, theirs;
  for (int r : rows) ours.push_back(m.ours[r]);
  for (int c : cols) theirs.push_back(m.theirs[c]);
  out.matrix = PayoffMatrix(std::move(ours), std::move(theirs));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) out.matrix.at(a, b) = m.at(rows[a], cols[b]);
  }
  return out;
}

MaximinChoice pure_maximin(const PayoffMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("maximin of an empty matrix");
  MaximinChoice best{0, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < m.rows(); ++i) {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) worst = std::min(worst, m.at(i, j));
    if (worst > best.value) best = {i, worst};
  }
  return best;
}

}  // namespace duelist
