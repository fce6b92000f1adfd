#include "duelist/opponent_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "duelist/hash.hpp"

namespace duelist {

ActionKey action_key(const BattleState& state, int side, const Action& action) {
  const auto& sd = state.sides[side];
  switch (action.kind) {
    case Action::Kind::Pass:
      return {ActionKey::Kind::Pass, 0};
    case Action::Kind::Switch:
      return {ActionKey::Kind::Switch, sd.team[action.index].species.value};
    case Action::Kind::Move:
      if (action.is_struggle()) return {ActionKey::Kind::Struggle, 0};
      return {ActionKey::Kind::Move, sd.active_pokemon().moves[action.index].move.value};
  }
  return {};
}

std::vector<ActionKey> action_keys(const BattleState& state, int side, const std::vector<Action>& actions) {
  std::vector<ActionKey> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(action_key(state, side, a));
  return out;
}

void OpponentModel::observe(const PayoffMatrix& matrix, const std::vector<ActionKey>& keys, int our_index,
                            int taken) {
  if (static_cast<int>(keys.size()) != matrix.cols()) throw std::invalid_argument("one key per column required");
  if (taken < 0 || taken >= matrix.cols()) throw std::invalid_argument("observed action index out of range");
  if (our_index < 0 || our_index >= matrix.rows()) throw std::invalid_argument("our action index out of range");
  // The opponent's payoff is the negation of ours.
  const double taken_payoff = -matrix.at(our_index, taken);
  for (int j = 0; j < matrix.cols(); ++j) {
    payoff_regret_[keys[j]] += -matrix.at(our_index, j) - taken_payoff;
    observation_regret_[keys[j]] += j == taken ? 1.0 : 0.0;
  }
  history_.push_back({matrix, keys, our_index, taken});
}

std::vector<double> OpponentModel::predict(const std::vector<ActionKey>& keys) const {
  if (keys.empty()) throw std::invalid_argument("predict needs at least one action");
  const auto& table = mode_ == Mode::PayoffRegret ? payoff_regret_ : observation_regret_;
  std::vector<double> p(keys.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    auto it = table.find(keys[j]);
    if (it != table.end() && it->second > 0.0) p[j] = it->second;
    total += p[j];
  }
  if (total <= 0.0 || !std::isfinite(total)) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(keys.size()));
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

double OpponentModel::payoff_regret(const ActionKey& k) const {
  auto it = payoff_regret_.find(k);
  return it == payoff_regret_.end() ? 0.0 : it->second;
}

double OpponentModel::observation_regret(const ActionKey& k) const {
  auto it = observation_regret_.find(k);
  return it == observation_regret_.end() ? 0.0 : it->second;
}

std::uint64_t OpponentModel::fingerprint() const {
  Hasher h(0x0dd5);
  h.add(static_cast<int>(mode_));
  const auto& table = mode_ == Mode::PayoffRegret ? payoff_regret_ : observation_regret_;
  for (const auto& [k, v] : table) {
    h.add(static_cast<int>(k.kind));
    h.add(k.id);
    h.add(v);
  }
  return h.digest();
}

namespace {

const char* kind_name(ActionKey::Kind k) {
  switch (k) {
    case ActionKey::Kind::Move: return "move";
    case ActionKey::Kind::Switch: return "switch";
    case ActionKey::Kind::Struggle: return "struggle";
    case ActionKey::Kind::Pass: return "pass";
  }
  return "?";
}

nlohmann::json key_json(const ActionKey& k) { return {{"kind", kind_name(k.kind)}, {"id", k.id}}; }

}  // namespace

nlohmann::json OpponentModel::to_json() const {
  nlohmann::json j;
  j["mode"] = mode_ == Mode::PayoffRegret ? "payoff-regret" : "observation-regret";
  auto table = [](const std::map<ActionKey, double>& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [k, v] : t) {
      auto e = key_json(k);
      e["regret"] = v;
      arr.push_back(e);
    }
    return arr;
  };
  j["payoff_regret"] = table(payoff_regret_);
  j["observation_regret"] = table(observation_regret_);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& e : history_) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < e.matrix.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < e.matrix.cols(); ++c) row.push_back(e.matrix.at(i, c));
      rows.push_back(row);
    }
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& k : e.keys) keys.push_back(key_json(k));
    hist.push_back({{"matrix", rows}, {"keys", keys}, {"ours", e.our_index}, {"taken", e.taken}});
  }
  j["history"] = hist;
  return j;
}

Response respond(const PayoffMatrix& m, const std::vector<double>& probs) {
  if (static_cast<int>(probs.size()) != m.cols()) {
    throw std::invalid_argument("respond: " + std::to_string(probs.size()) + " probabilities for " +
                                std::to_string(m.cols()) + " columns");
  }
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("respond: empty matrix");
  const auto [lo_it, hi_it] = std::minmax_element(m.values.begin(), m.values.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  auto norm = [&](double v) { return span > 0.0 ? (v - lo) / span : 0.0; };

  Response r;
  double best_w = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols(); ++j) {
    double payoff = 0.0;
    for (int i = 0; i < m.rows(); ++i) payoff = std::max(payoff, norm(m.at(i, j)));
    const double w = probs[j] * payoff;
    if (w < best_w) {
      best_w = w;
      r.column = j;
    }
  }
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.rows(); ++i) {
    if (m.at(i, r.column) > best_v) {
      best_v = m.at(i, r.column);
      r.row = i;
    }
  }
  return r;
}

}  // namespace duelist
