#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "duelist/agents.hpp"
#include "duelist/session.hpp"

namespace duelist {

struct ServerConfig {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  int decision_timeout_ms = 10000;
  bool allow_inspect = false;  // whether challenges may ask for payoff-inspect
  int team_size = kMaxTeam;    // for random teams
  int max_turns = 500;
  int ai_threads = 1;
  std::uint64_t seed = 1;      // battles without a challenge seed use mix64(seed + n)
  // Opponents a challenge may name; a challenge naming none gets
  // default_opponent.
  std::map<std::string, AgentSpec> opponents;
  std::string default_opponent;
  std::size_t max_frame_bytes = 1u << 16;

  void validate() const;  // throws std::invalid_argument
};

// WebSocket front end: one BattleSession per connection at a time, the
// client on one side and a server agent on the other. Agent decisions run on
// a separate pool and are handed back when done, so the network thread never
// waits on a search. See docs/protocol.md for the frames.
class BattleServer {
 public:
  // Binds immediately; throws std::runtime_error when that fails.
  BattleServer(const Dex& dex, ServerConfig cfg);
  ~BattleServer();
  BattleServer(const BattleServer&) = delete;
  BattleServer& operator=(const BattleServer&) = delete;

  std::uint16_t port() const;
  // Serves on a background thread until stop().
  void start();
  // Serves on the calling thread until stop() is called from elsewhere.
  void run();
  void stop();

  std::uint64_t battles_started() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace duelist
