#include "duelist/server.hpp"

#include <atomic>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "duelist/hash.hpp"
#include "duelist/team.hpp"

namespace duelist {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using json = nlohmann::json;

constexpr int kProtocolVersion = 1;

void ServerConfig::validate() const {
  if (decision_timeout_ms < 1) throw std::invalid_argument("decision timeout must be >= 1 ms");
  if (team_size < 1 || team_size > kMaxTeam) throw std::invalid_argument("team size must lie in [1, 6]");
  if (max_turns < 1) throw std::invalid_argument("max turns must be >= 1");
  if (ai_threads < 1) throw std::invalid_argument("ai threads must be >= 1");
  if (opponents.empty()) throw std::invalid_argument("server needs at least one opponent");
  if (!opponents.count(default_opponent)) throw std::invalid_argument("unknown default opponent '" + default_opponent + "'");
}

namespace {

struct Shared {
  const Dex& dex;
  ServerConfig cfg;
  std::atomic<std::uint64_t> battles{0};
};

// Malformed input gets an error frame; a protocol violation also closes.
struct Violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Shared& server, asio::thread_pool& pool)
      : ws_(std::move(socket)), server_(server), ai_strand_(asio::make_strand(pool)),
        timers_{asio::steady_timer(ws_.get_executor()), asio::steady_timer(ws_.get_executor())} {}

  void start() {
    ws_.read_message_max(server_.cfg.max_frame_bytes);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->shut();
      self->on_message();
      if (!self->closing_) self->read();
    });
  }

  void on_message() {
    const bool text = ws_.got_text();
    const auto payload = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      if (!text) throw Violation("binary frames are not part of the protocol");
      json msg;
      try {
        msg = json::parse(payload);
      } catch (const json::exception&) {
        return send(error("malformed JSON"));
      }
      if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
        return send(error("frame needs a string \"type\""));
      }
      const auto type = msg["type"].get<std::string>();
      if (type == "hello") return on_hello();
      if (type == "challenge") return on_challenge(msg);
      if (type == "choose") return on_choose(msg);
      if (type == "payoff-inspect") return on_inspect();
      send(error("unknown message type '" + type + "'"));
    } catch (const Violation& v) {
      spdlog::info("closing connection: {}", v.what());
      send(error(v.what()));
      closing_ = true;
      flush();
    }
  }

  void on_hello() {
    hello_ = true;
    json names = json::array();
    for (const auto& [name, spec] : server_.cfg.opponents) names.push_back(name);
    send({{"type", "hello"},
          {"server", "duelist"},
          {"protocol", kProtocolVersion},
          {"dex-hash", server_.dex.content_hash()},
          {"opponents", names},
          {"default-opponent", server_.cfg.default_opponent},
          {"timeout-ms", server_.cfg.decision_timeout_ms},
          {"inspect-available", server_.cfg.allow_inspect}});
  }

  void on_challenge(const json& msg) {
    if (!hello_) throw Violation("challenge before hello");
    if (session_ && !session_->finished()) throw Violation("challenge during a running battle");
    const auto& cfg = server_.cfg;
    const auto n = server_.battles.fetch_add(1);
    std::uint64_t seed = mix64(cfg.seed + n);
    std::string opponent = cfg.default_opponent;
    int side = 0;
    bool inspect = false;
    Team ours, theirs;
    try {
      if (msg.contains("seed")) seed = msg.at("seed").get<std::uint64_t>();
      if (msg.contains("opponent")) opponent = msg.at("opponent").get<std::string>();
      if (msg.contains("side")) side = msg.at("side").get<int>();
      if (msg.contains("inspect")) inspect = msg.at("inspect").get<bool>();
      if (side != 0 && side != 1) return send(error("side must be 0 or 1"));
      if (!cfg.opponents.count(opponent)) return send(error("unknown opponent '" + opponent + "'"));
      if (inspect && !cfg.allow_inspect) return send(error("payoff-inspect is disabled on this server"));
      std::mt19937_64 rng(mix64(seed + 1));
      if (msg.contains("team")) {
        ours = team_from_json(server_.dex, json{{"team", msg.at("team")}});
        if (auto v = team_violation(server_.dex, ours); !v.empty()) return send(error("illegal team: " + v));
      } else {
        ours = random_team(server_.dex, rng, cfg.team_size);
      }
      theirs = random_team(server_.dex, rng, cfg.team_size);
    } catch (const std::exception& e) {
      return send(error(std::string("bad challenge: ") + e.what()));
    }

    human_ = side;
    inspect_ = inspect;
    decision_.reset();
    agent_ = std::shared_ptr<Agent>(cfg.opponents.at(opponent).make(mix64(seed ^ 0xa1)));
    SessionConfig sc{inspect, cfg.decision_timeout_ms, cfg.max_turns};
    session_ = side == 0 ? std::make_shared<BattleSession>(server_.dex, ours, theirs, seed, sc)
                         : std::make_shared<BattleSession>(server_.dex, theirs, ours, seed, sc);
    spdlog::info("battle {} started: client on side {} vs {}", n, side, opponent);
    dispatch(session_->start());
  }

  void on_choose(const json& msg) {
    if (!session_ || !session_->started()) throw Violation("choose without a battle");
    if (session_->finished()) return send(error("the battle is over"));
    if (!msg.contains("action")) return send(error("choose needs an \"action\""));
    dispatch(session_->choose(human_, msg["action"]));
  }

  void on_inspect() {
    if (!session_) throw Violation("payoff-inspect without a battle");
    if (!inspect_) return send(error("payoff-inspect was not enabled for this battle"));
    if (!decision_) return send(error("the opponent has not decided anything yet"));
    send({{"type", "payoff-inspect"}, {"rid", decision_rid_}, {"decision", to_json(*decision_)}});
  }

  // Routes session output: client frames go out, agent requests start a
  // decision, and each armed request gets its timer.
  void dispatch(const std::vector<Outgoing>& frames) {
    const int ai = 1 - human_;
    bool ended = false;
    for (const auto& f : frames) {
      const auto& type = f.frame["type"];
      if (f.side == human_) send(f.frame);
      if (type == "battle-end") ended = true;
      if (f.side == ai && type == "state-update") observe();
    }
    if (ended) {
      for (auto& t : timers_) t.cancel();
      return;
    }
    const int rid = session_->request_id();
    if (rid == armed_rid_) return;
    armed_rid_ = rid;
    for (int side = 0; side < 2; ++side) {
      if (!session_->awaiting(side)) continue;
      arm_timer(side, rid);
      if (side == ai) decide(rid);
    }
  }

  void arm_timer(int side, int rid) {
    auto& t = timers_[side];
    t.expires_after(std::chrono::milliseconds(server_.cfg.decision_timeout_ms));
    t.async_wait([self = shared_from_this(), side, rid, session = session_](beast::error_code ec) {
      if (ec || session != self->session_ || session->request_id() != rid || !session->awaiting(side)) return;
      spdlog::info("side {} timed out on request {}", side, rid);
      self->dispatch(session->timeout(side));
    });
  }

  void decide(int rid) {
    const int ai = 1 - human_;
    auto view = session_->view(ai);
    asio::post(ai_strand_, [self = shared_from_this(), agent = agent_, session = session_, view = std::move(view), rid,
                            ai] {
      Action action;
      std::optional<Decision> decision;
      std::string failure;
      try {
        action = agent->choose(view);
        if (const auto* d = agent->last_decision()) decision = *d;
      } catch (const std::exception& e) {
        failure = e.what();
      }
      asio::post(self->ws_.get_executor(), [self, session, rid, ai, action, decision = std::move(decision), failure] {
        if (session != self->session_ || session->request_id() != rid || !session->awaiting(ai)) return;
        if (!failure.empty()) return self->dispatch(session->forfeit(ai, failure));
        if (decision) {
          self->decision_ = decision;
          self->decision_rid_ = rid;
        }
        self->dispatch(session->choose(ai, action));
      });
    });
  }

  void observe() {
    const int ai = 1 - human_;
    const auto& step = *session_->last_step();
    asio::post(ai_strand_, [agent = agent_, action = step.actions[ai], events = events_for_side(step.events, ai)] {
      try {
        agent->observe(action, events);
      } catch (const std::exception& e) {
        spdlog::warn("agent observe failed: {}", e.what());
      }
    });
  }

  static json error(const std::string& message) { return {{"type", "error"}, {"message", message}}; }

  void send(const json& frame) {
    outbox_.push_back(frame.dump());
    flush();
  }

  void flush() {
    if (writing_) return;
    if (outbox_.empty()) {
      if (closing_ && !closed_) {
        closed_ = true;
        ws_.async_close(websocket::close_code::policy_error,
                        [self = shared_from_this()](beast::error_code) { self->shut(); });
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) return self->shut();
      self->outbox_.pop_front();
      self->flush();
    });
  }

  void shut() {
    closing_ = true;
    outbox_.clear();
    for (auto& t : timers_) t.cancel();
    session_.reset();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Shared& server_;
  asio::strand<asio::thread_pool::executor_type> ai_strand_;
  std::array<asio::steady_timer, 2> timers_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
  bool hello_ = false;

  std::shared_ptr<BattleSession> session_;
  std::shared_ptr<Agent> agent_;
  int human_ = 0;
  bool inspect_ = false;
  int armed_rid_ = -1;
  std::optional<Decision> decision_;
  int decision_rid_ = -1;
};

}  // namespace

struct BattleServer::Impl {
  Impl(const Dex& dex, ServerConfig cfg)
      : pool(static_cast<std::size_t>(cfg.ai_threads)), shared{dex, std::move(cfg)} {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), shared, pool)->start();
      accept();
    });
  }

  // Declared before the io context: connections still queued there hold
  // strands on the pool.
  asio::thread_pool pool;
  Shared shared;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  std::atomic<bool> stopped{false};
};

BattleServer::BattleServer(const Dex& dex, ServerConfig cfg) {
  cfg.validate();
  impl_ = std::make_unique<Impl>(dex, std::move(cfg));
  auto& im = *impl_;
  try {
    const tcp::endpoint ep(asio::ip::make_address(im.shared.cfg.address), im.shared.cfg.port);
    im.acceptor.open(ep.protocol());
    im.acceptor.set_option(tcp::acceptor::reuse_address(true));
    im.acceptor.bind(ep);
    im.acceptor.listen();
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("cannot listen on {}:{}: {}", im.shared.cfg.address, im.shared.cfg.port, e.what()));
  }
  im.accept();
}

BattleServer::~BattleServer() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint16_t BattleServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void BattleServer::start() {
  impl_->thread = std::thread([this] { run(); });
}

void BattleServer::run() {
  spdlog::info("serving on ws://{}:{}", impl_->shared.cfg.address, port());
  impl_->io.run();
}

void BattleServer::stop() {
  if (impl_->stopped.exchange(true)) return;
  impl_->io.stop();
  if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id()) impl_->thread.join();
  impl_->pool.join();
}

std::uint64_t BattleServer::battles_started() const { return impl_->shared.battles.load(); }

}  // namespace duelist
