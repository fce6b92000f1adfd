#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

#include "duelist/payoff.hpp"

namespace duelist {

// Identity of an opponent action that survives turn-to-turn changes of the
// action list: the move used or the species switched in.
struct ActionKey {
  enum class Kind : std::uint8_t { Move, Switch, Struggle, Pass };
  Kind kind = Kind::Pass;
  std::uint16_t id = 0;

  auto operator<=>(const ActionKey&) const = default;
};

// Key of `action` taken by `side` in `state`.
ActionKey action_key(const BattleState& state, int side, const Action& action);
std::vector<ActionKey> action_keys(const BattleState& state, int side, const std::vector<Action>& actions);

// Regret-matching predictor of the opponent's next action.
//
// Two regret tables are kept per action identity:
//  * payoff regret, updated with the opponent's counterfactual gains
//      R[j] += u_opp(i_obs, j) - u_opp(i_obs, taken)
//  * observation regret, where the payoff of an action is 1 if it was the
//    one taken and 0 otherwise, so R[j] += [j == taken].
// predict() runs regret matching on the observation table by default; the
// payoff table is available through Mode::PayoffRegret.
class OpponentModel {
 public:
  enum class Mode : std::uint8_t { ObservationRegret, PayoffRegret };

  struct Entry {
    PayoffMatrix matrix;  // our payoff
    std::vector<ActionKey> keys;
    int our_index = 0;
    int taken = 0;
  };

  explicit OpponentModel(Mode mode = Mode::ObservationRegret) : mode_(mode) {}

  // Records that the opponent took column `taken` while we took row
  // `our_index`. Throws std::invalid_argument on a bad index or key count.
  void observe(const PayoffMatrix& matrix, const std::vector<ActionKey>& keys, int our_index, int taken);

  // Distribution over `keys`: proportional to the positive part of the
  // cumulative regret of each identity, uniform when all are zero.
  std::vector<double> predict(const std::vector<ActionKey>& keys) const;

  const std::vector<Entry>& history() const { return history_; }
  double payoff_regret(const ActionKey& k) const;
  double observation_regret(const ActionKey& k) const;
  Mode mode() const { return mode_; }

  // Order-sensitive digest of everything predict() depends on.
  std::uint64_t fingerprint() const;

  nlohmann::json to_json() const;

 private:
  Mode mode_;
  std::vector<Entry> history_;
  std::map<ActionKey, double> payoff_regret_;
  std::map<ActionKey, double> observation_regret_;
};

// Best response against the probability-weighted most threatening column:
// normalize values affinely to [0, 1]; payoff_j = max_i normalized[i][j];
// w_j = probs[j] * payoff_j; j* = argmin w_j; return argmax_i values[i][j*].
// Ties go to the lowest index. Throws std::invalid_argument when the
// probability count does not match the column count.
struct Response {
  int row = 0;
  int column = 0;  // j*
};
Response respond(const PayoffMatrix& m, const std::vector<double>& probs);

}  // namespace duelist
