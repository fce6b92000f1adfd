#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "duelist/hidden_info.hpp"
#include "duelist/search.hpp"
#include "duelist/view.hpp"

namespace duelist {

// What a searching agent considered for its last choice.
struct Decision {
  PayoffMatrix matrix;
  std::vector<double> prediction;
  int row = -1;
  int column = -1;
  double value = 0.0;
  int depth = 0;
  std::uint64_t nodes = 0;
};

// Wall-clock fields are left out so equal searches give equal JSON.
nlohmann::json to_json(const Decision& d);

// A player. Agents only ever see their own SideView and the events filtered
// for their side.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Returns one of view.legal. Throwing forfeits the battle.
  virtual Action choose(const SideView& view) = 0;
  // Called after every resolution with our action and our slice of the log.
  virtual void observe(const Action& /*ours*/, const EventLog& /*events*/) {}
  virtual const Decision* last_decision() const { return nullptr; }
};

// Builds a fresh agent for one battle; the seed drives any randomness.
using AgentFactory = std::function<std::unique_ptr<Agent>(std::uint64_t seed)>;

struct AgentSpec {
  std::string name;
  AgentFactory make;
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  Action choose(const SideView& view) override;

 private:
  std::mt19937_64 rng_;
};

// Highest damage move against the opposing active under average luck (every
// draw 0.5, so moves with accuracy <= 0.5 count as misses). The opposing
// active is its canonical build with any revealed ability or item. Never
// switches voluntarily; replacements bring in the member with the best such
// move. Ties go to the earliest legal action.
class GreedyAgent final : public Agent {
 public:
  explicit GreedyAgent(const Dex& dex) : dex_(&dex) {}
  std::string name() const override { return "greedy"; }
  Action choose(const SideView& view) override;

 private:
  const Dex* dex_;
};

// Throws on every request.
class ForfeitAgent final : public Agent {
 public:
  std::string name() const override { return "forfeit"; }
  Action choose(const SideView& view) override;
};

// Shared, read-only inputs of the search agent.
struct SearchResources {
  std::shared_ptr<const MatchupMatrix> matrix;
  std::shared_ptr<const UsageStats> usage;  // may be null: canonical builds throughout
  std::shared_ptr<MilpCache> milp;          // may be null: no memo
};

// The full agent: completes the view into a concrete state (imputation for
// revealed opponents, matchup selection for unseen ones), searches it, and
// feeds every observed opponent move or switch to its opponent model.
class SearchAgent final : public Agent {
 public:
  SearchAgent(const Dex& dex, SearchConfig cfg, SearchResources resources,
              std::shared_ptr<TranspositionTable> tt = nullptr);
  std::string name() const override;
  Action choose(const SideView& view) override;
  void observe(const Action& ours, const EventLog& events) override;
  const Decision* last_decision() const override { return decision_ ? &*decision_ : nullptr; }

  const OpponentModel& model() const { return model_; }
  std::uint64_t observations() const { return observed_; }
  std::uint64_t skipped_observations() const { return skipped_; }

 private:
  const Dex* dex_;
  SearchResources res_;
  Searcher searcher_;
  OpponentModel model_;
  std::optional<Decision> decision_;
  std::vector<ActionKey> keys_;  // of decision_->matrix.theirs
  bool observable_ = false;      // last request was a move turn for both sides
  int side_ = 0;
  std::uint64_t observed_ = 0;
  std::uint64_t skipped_ = 0;
};

// The opponent action shown by `events` (seen by `side`) on a move turn:
// its first move use or switch-in. Empty when it never acted (full
// paralysis, fainted first).
std::optional<ActionKey> observed_action(const EventLog& events, int side);

// Factories for the built-in agents. Search agents built by one spec share
// its resources.
AgentSpec random_agent_spec();
AgentSpec greedy_agent_spec(const Dex& dex);
AgentSpec forfeit_agent_spec();
AgentSpec search_agent_spec(const Dex& dex, SearchConfig cfg, SearchResources resources, std::string name = "");

// "random", "greedy", "forfeit", "search" (depth from `search`) or
// "search:D". Throws std::invalid_argument for anything else, or for a
// search agent without a matrix.
AgentSpec agent_spec_from_name(const std::string& name, const Dex& dex, const SearchConfig& search,
                               const SearchResources& resources);

}  // namespace duelist
