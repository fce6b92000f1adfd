#include "duelist/session.hpp"

#include <algorithm>

#include "duelist/engine.hpp"
#include "duelist/hash.hpp"
#include "duelist/team.hpp"

namespace duelist {

using json = nlohmann::json;

namespace {

const char* request_name(RequestKind k) {
  switch (k) {
    case RequestKind::Move: return "move";
    case RequestKind::Replacement: return "replacement";
    case RequestKind::Wait: return "wait";
  }
  return "wait";
}

}  // namespace

BattleSession::BattleSession(const Dex& dex, Team team0, Team team1, std::uint64_t seed, SessionConfig cfg)
    : dex_(&dex),
      teams_{std::move(team0), std::move(team1)},
      cfg_(cfg),
      state_(make_battle(dex, teams_[0], teams_[1])),
      ledger_(state_),
      rng_(seed),
      timeout_rng_(mix64(seed ^ 0x7113e0u)) {}

json BattleSession::error_frame(const std::string& message) { return {{"type", "error"}, {"message", message}}; }

json BattleSession::request_frame(int side) const {
  const auto v = view(side);
  return {{"type", "request"}, {"rid", request_id_}, {"request", request_name(v.request)}, {"view", to_json(*dex_, v)}};
}

bool BattleSession::awaiting(int side) const {
  return started_ && !finished() && !committed_[side];
}

std::vector<Outgoing> BattleSession::start() {
  if (started_) throw StateError("battle already started");
  started_ = true;
  std::vector<Outgoing> out;
  for (int side = 0; side < 2; ++side) {
    out.push_back({side,
                   {{"type", "battle-start"},
                    {"side", side},
                    {"team", team_to_json(*dex_, teams_[side])["team"]},
                    {"opp-team-size", teams_[1 - side].size()},
                    {"timeout-ms", cfg_.decision_timeout_ms},
                    {"max-turns", cfg_.max_turns},
                    {"inspect", cfg_.inspect && side == 0}}});
  }
  auto requests = issue_requests();
  out.insert(out.end(), requests.begin(), requests.end());
  return out;
}

std::vector<Outgoing> BattleSession::issue_requests() {
  ++request_id_;
  committed_ = {};
  for (int side = 0; side < 2; ++side) {
    if (view(side).request == RequestKind::Wait) committed_[side] = Action::pass();
  }
  return {{0, request_frame(0)}, {1, request_frame(1)}};
}

std::vector<Outgoing> BattleSession::choose(int side, const json& action) {
  Action a;
  try {
    if (action.is_string()) {
      a = parse_action(action.get<std::string>());
    } else {
      const auto kind = action.at("kind").get<std::string>();
      if (kind == "pass") {
        a = Action::pass();
      } else {
        const int index = action.at("index").get<int>();
        if (index < 0 || index > 255 || (kind != "move" && kind != "switch")) throw std::invalid_argument(kind);
        a = kind == "move" ? Action::use_move(index) : Action::switch_to(index);
      }
    }
  } catch (const std::exception&) {
    if (!awaiting(side)) return {{side, error_frame("no choice is pending")}};
    auto e = error_frame("unparseable action " + action.dump());
    e["rid"] = request_id_;
    return {{side, e}, {side, request_frame(side)}};
  }
  return choose(side, a);
}

std::vector<Outgoing> BattleSession::choose(int side, const Action& action) {
  if (side != 0 && side != 1) throw std::invalid_argument("side must be 0 or 1");
  if (!awaiting(side)) return {{side, error_frame("no choice is pending")}};
  if (!is_legal(*dex_, state_, side, action)) {
    auto e = error_frame("illegal action");
    e["action"] = to_string(action);
    e["rid"] = request_id_;
    return {{side, e}, {side, request_frame(side)}};
  }
  committed_[side] = action;
  if (committed_[0] && committed_[1]) return resolve();
  return {};
}

std::vector<Outgoing> BattleSession::timeout(int side) {
  if (!awaiting(side)) return {};
  const auto legal = legal_actions(*dex_, state_, side);
  const auto pick = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(timeout_rng_)];
  Event e;
  e.kind = EventKind::Timeout;
  e.side = static_cast<std::int8_t>(side);
  pending_.push_back(e);
  return choose(side, pick);
}

std::vector<Outgoing> BattleSession::forfeit(int side, const std::string& reason) {
  if (finished()) return {};
  auto out = end(1 - side, "forfeit");
  for (auto& o : out) o.frame["detail"] = reason;
  return out;
}

std::vector<Outgoing> BattleSession::resolve() {
  const bool move_turn = !state_.replacement_pending();
  auto r = resolve_turn(*dex_, state_, *committed_[0], *committed_[1], rng_);
  rng_.take_draws();
  if (move_turn) ++turns_;
  ledger_.record(r.events);
  state_ = std::move(r.state);

  Step step{{*committed_[0], *committed_[1]}, std::move(pending_)};
  pending_.clear();
  step.events.insert(step.events.end(), r.events.begin(), r.events.end());

  std::vector<Outgoing> out;
  for (int side = 0; side < 2; ++side) {
    json events = json::array();
    for (const auto& e : events_for_side(step.events, side)) events.push_back(to_json(*dex_, e));
    out.push_back({side,
                   {{"type", "state-update"},
                    {"rid", request_id_},
                    {"turn", turns_},
                    {"action", to_json(step.actions[side])},
                    {"events", std::move(events)}}});
  }
  last_step_ = std::move(step);

  std::vector<Outgoing> next;
  if (state_.finished()) {
    next = end(state_.winner_side(), "knockout");
  } else if (!state_.replacement_pending() && turns_ >= cfg_.max_turns) {
    next = end(std::nullopt, "turn-limit");
  } else {
    next = issue_requests();
  }
  out.insert(out.end(), next.begin(), next.end());
  return out;
}

std::vector<Outgoing> BattleSession::end(std::optional<int> winner, const std::string& reason) {
  winner_ = winner;
  end_reason_ = reason;
  committed_ = {};
  std::vector<Outgoing> out;
  for (int side = 0; side < 2; ++side) {
    out.push_back({side,
                   {{"type", "battle-end"},
                    {"winner", winner ? json(*winner) : json(nullptr)},
                    {"turns", turns_},
                    {"reason", reason}}});
  }
  return out;
}

}  // namespace duelist
