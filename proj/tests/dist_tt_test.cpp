#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <boost/asio.hpp>

#include "duelist/dist_tt.hpp"
#include "duelist/search.hpp"
#include "support.hpp"

namespace duelist {
namespace {

using namespace std::chrono_literals;
using testing::dex24;
using testing::random_midgame;
namespace asio = boost::asio;

std::uint16_t free_port() {
  asio::io_context io;
  asio::ip::tcp::acceptor a(io, {asio::ip::make_address("127.0.0.1"), 0});
  return a.local_endpoint().port();
}

template <typename Pred>
bool wait_for(Pred pred, std::chrono::milliseconds limit) {
  const auto end = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(2ms);
  }
  return pred();
}

TTEntry entry(std::uint64_t h, int depth, double value) { return {{h, ~h}, static_cast<std::uint8_t>(depth), value, 0}; }

// Three peers, each listing the other two.
struct Mesh {
  std::vector<std::unique_ptr<DistributedTT>> peers;

  explicit Mesh(int flush_ms = 50, int ttl = 0) {
    std::vector<std::uint16_t> ports = {free_port(), free_port(), free_port()};
    for (int i = 0; i < 3; ++i) {
      PeerConfig cfg;
      cfg.peer_id = static_cast<std::uint16_t>(i + 1);
      cfg.listen_address = "127.0.0.1:" + std::to_string(ports[i]);
      for (int j = 0; j < 3; ++j) {
        if (j != i) cfg.peer_addresses.push_back("127.0.0.1:" + std::to_string(ports[j]));
      }
      cfg.flush_interval_ms = flush_ms;
      cfg.entry_ttl = ttl;
      peers.push_back(std::make_unique<DistributedTT>(cfg, std::make_shared<TranspositionTable>(1u << 16, cfg.peer_id)));
    }
  }

  bool connected() const {
    for (const auto& p : peers) {
      const auto s = p->stats();
      if (s.outbound_connected != 2 || s.inbound_connected != 2) return false;
    }
    return true;
  }
};

TEST(Frame, RoundTrip) {
  const std::vector<TTEntry> entries = {entry(1, 3, 0.25), entry(0xdeadbeefcafef00dULL, 255, -1e300), entry(7, 0, -0.0)};
  const auto bytes = encode_frame(42, entries);
  ASSERT_EQ(bytes.size(), 4 + kFrameHeaderBytes + 3 * kEntryBytes);
  EXPECT_EQ(bytes[0], kFrameHeaderBytes + 3 * kEntryBytes);
  const auto f = decode_frame_body(bytes.data() + 4, bytes.size() - 4);
  EXPECT_EQ(f.peer_id, 42);
  ASSERT_EQ(f.entries.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    auto want = entries[i];
    want.origin_peer = 42;
    EXPECT_EQ(f.entries[i], want);
  }
  EXPECT_TRUE(std::signbit(f.entries[2].value));
  EXPECT_TRUE(decode_frame_body(encode_frame(3, {}).data() + 4, kFrameHeaderBytes).entries.empty());
}

TEST(Frame, RejectsDamage) {
  auto bytes = encode_frame(1, {entry(1, 1, 1.0)});
  const auto body = [&] { return std::vector<std::uint8_t>(bytes.begin() + 4, bytes.end()); };
  EXPECT_THROW(decode_frame_body(body().data(), 5), FrameError);
  auto b = body();
  EXPECT_THROW(decode_frame_body(b.data(), b.size() - 1), FrameError);
  b[0] ^= 1;
  EXPECT_THROW(decode_frame_body(b.data(), b.size()), FrameError);
  b = body();
  b[4] = 9;
  EXPECT_THROW(decode_frame_body(b.data(), b.size()), FrameError);
  b = body();
  b[7] = 2;
  EXPECT_THROW(decode_frame_body(b.data(), b.size()), FrameError);
  EXPECT_THROW(encode_frame(1, std::vector<TTEntry>(kMaxFrameEntries + 1)), std::invalid_argument);
}

TEST(PeerConfig, Validation) {
  PeerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.peer_addresses = {"localhost"};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.listen_address = "127.0.0.1:70000";
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_endpoint("10.0.0.2:9000"), std::make_pair(std::string("10.0.0.2"), std::uint16_t{9000}));
}

TEST(DistributedTT, LonePeerIsALocalTable) {
  auto table = std::make_shared<TranspositionTable>();
  DistributedTT peer({}, table);
  EXPECT_NE(peer.listen_port(), 0);
  table->store({5, 6}, 2, 0.5);
  EXPECT_EQ(table->lookup({5, 6}, 2), 0.5);
  std::this_thread::sleep_for(120ms);
  const auto s = peer.stats();
  EXPECT_EQ(s.enqueued, 0u);
  EXPECT_EQ(s.frames_sent, 0u);
  EXPECT_EQ(peer.queued(), 0u);
}

TEST(DistributedTT, BindFailureThrows) {
  DistributedTT first({}, std::make_shared<TranspositionTable>());
  PeerConfig cfg;
  cfg.listen_address = "127.0.0.1:" + std::to_string(first.listen_port());
  EXPECT_THROW(DistributedTT(cfg, std::make_shared<TranspositionTable>()), std::runtime_error);
  cfg.listen_address = "256.1.1.1:0";
  EXPECT_THROW(DistributedTT(cfg, std::make_shared<TranspositionTable>()), std::runtime_error);
}

TEST(DistributedTT, FullQueueDropsOldest) {
  PeerConfig cfg;
  cfg.peer_addresses = {"127.0.0.1:" + std::to_string(free_port())};  // nobody listens
  cfg.queue_capacity = 4;
  DistributedTT peer(cfg, std::make_shared<TranspositionTable>());
  for (int i = 0; i < 10; ++i) peer.broadcast(entry(i, 1, 0.0));
  peer.broadcast(std::vector<TTEntry>{});
  const auto s = peer.stats();
  EXPECT_EQ(s.enqueued, 10u);
  EXPECT_EQ(s.dropped, 6u);
  EXPECT_EQ(peer.queued(), 4u);
  std::this_thread::sleep_for(150ms);
  EXPECT_EQ(peer.stats().frames_sent, 0u);
  EXPECT_EQ(peer.queued(), 4u);
}

TEST(DistributedTT, MeshConnectsAndConverges) {
  Mesh mesh;
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  for (int i = 0; i < 3; ++i) {
    for (std::uint64_t k = 0; k < 1000; ++k) mesh.peers[i]->table()->store({k * 3 + i, k}, 1 + i, 0.001 * k);
  }
  const auto converged = [&] {
    for (const auto& p : mesh.peers) {
      if (p->table()->size() != 3000) return false;
    }
    return true;
  };
  EXPECT_TRUE(wait_for(converged, 10 * 50ms));
  for (const auto& p : mesh.peers) {
    for (int i = 0; i < 3; ++i) {
      const auto e = p->table()->get({999u * 3 + i, 999});
      ASSERT_TRUE(e);
      EXPECT_EQ(e->depth, 1 + i);
      EXPECT_EQ(e->origin_peer, i + 1);
    }
    EXPECT_EQ(p->stats().malformed, 0u);
  }
}

TEST(DistributedTT, EntryArrivesWithinHalfASecond) {
  Mesh mesh;
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  const auto start = std::chrono::steady_clock::now();
  mesh.peers[0]->table()->store({77, 78}, 3, 0.75);
  ASSERT_TRUE(wait_for([&] { return mesh.peers[2]->table()->lookup({77, 78}, 3).has_value(); }, 500ms));
  EXPECT_LT(std::chrono::steady_clock::now() - start, 500ms);
}

TEST(DistributedTT, MergeKeepsTheDeeperEntry) {
  Mesh mesh;
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  auto local = mesh.peers[1]->table();
  local->store({9, 9}, 4, 1.0);
  mesh.peers[0]->table()->store({9, 9}, 2, -1.0);
  mesh.peers[0]->table()->store({10, 10}, 5, 0.5);
  local->store({10, 10}, 1, 0.1);
  ASSERT_TRUE(wait_for([&] { return local->get({10, 10})->depth == 5; }, 1s));
  ASSERT_TRUE(wait_for([&] { return mesh.peers[1]->stats().received >= 2; }, 1s));
  EXPECT_EQ(local->get({9, 9})->value, 1.0);
  EXPECT_EQ(local->get({10, 10})->value, 0.5);
}

TEST(DistributedTT, BadFramesAreCountedAndSkipped) {
  DistributedTT peer({}, std::make_shared<TranspositionTable>());
  asio::io_context io;
  asio::ip::tcp::socket sock(io);
  sock.connect({asio::ip::make_address("127.0.0.1"), peer.listen_port()});
  auto bad = encode_frame(8, {entry(1, 1, 1.0)});
  bad[4] ^= 0xff;
  asio::write(sock, asio::buffer(bad));
  asio::write(sock, asio::buffer(encode_frame(8, {entry(2, 1, std::numeric_limits<double>::quiet_NaN())})));
  asio::write(sock, asio::buffer(encode_frame(8, {entry(3, 2, 0.5)})));
  ASSERT_TRUE(wait_for([&] { return peer.table()->get({3, ~3ULL}).has_value(); }, 1s));
  EXPECT_EQ(peer.stats().malformed, 2u);
  EXPECT_FALSE(peer.table()->get({1, ~1ULL}));
  EXPECT_FALSE(peer.table()->get({2, ~2ULL}));
  EXPECT_EQ(peer.table()->get({3, ~3ULL})->origin_peer, 8);
}

TEST(DistributedTT, RemoteEntriesExpireAfterTheirTtl) {
  Mesh mesh(20, 2);
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  auto& b = *mesh.peers[1];
  b.table()->store({1, 1}, 1, 0.0);
  mesh.peers[0]->table()->store({2, 2}, 1, 0.0);
  ASSERT_TRUE(wait_for([&] { return b.table()->get({2, 2}).has_value(); }, 1s));
  b.advance_turn();
  b.advance_turn();
  EXPECT_TRUE(b.table()->get({2, 2}));
  b.advance_turn();
  EXPECT_FALSE(b.table()->get({2, 2}));
  EXPECT_TRUE(b.table()->get({1, 1}));
}

TEST(DistributedTT, GossipDoesNotChangeTheDecision) {
  std::mt19937_64 rng(404);
  const auto& dex = dex24();
  SearchConfig cfg;
  cfg.time_budget = std::numeric_limits<double>::infinity();
  Mesh mesh(10);
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  for (int t = 0; t < 4; ++t) {
    const auto s = random_midgame(dex, rng, 3, 2);
    Searcher alone(dex, cfg);
    const auto base = alone.search(s, 0, nullptr);
    Searcher first(dex, cfg, mesh.peers[0]->table());
    first.search(s, 0, nullptr);
    const auto before = mesh.peers[2]->stats().received;
    ASSERT_TRUE(wait_for([&] { return mesh.peers[2]->stats().received > before && mesh.peers[0]->queued() == 0; }, 1s));
    std::this_thread::sleep_for(30ms);
    Searcher second(dex, cfg, mesh.peers[2]->table());
    const auto shared = second.search(s, 0, nullptr);
    EXPECT_EQ(shared.action, base.action);
    ASSERT_EQ(shared.root.values.size(), base.root.values.size());
    for (std::size_t k = 0; k < base.root.values.size(); ++k) EXPECT_NEAR(shared.root.values[k], base.root.values[k], 1e-9);
  }
}

TEST(DistributedTT, StalledNetworkDoesNotDelayDecisions) {
  std::mt19937_64 rng(405);
  const auto& dex = dex24();
  Mesh mesh(10);
  ASSERT_TRUE(wait_for([&] { return mesh.connected(); }, 5s));
  SearchConfig cfg;
  cfg.time_budget = std::numeric_limits<double>::infinity();
  const auto s = random_midgame(dex, rng, 3, 1);
  const auto timed = [&](const std::shared_ptr<TranspositionTable>& table) {
    table->clear();
    Searcher searcher(dex, cfg, table);
    const auto start = std::chrono::steady_clock::now();
    const auto r = searcher.search(s, 0, nullptr);
    return std::make_pair(r.action, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  };
  const auto [calm_action, calm] = timed(mesh.peers[0]->table());
  mesh.peers[0]->inject_stall(2000ms);
  std::this_thread::sleep_for(30ms);  // let the flush timer enter the stall
  const auto [stalled_action, stalled] = timed(mesh.peers[0]->table());
  EXPECT_EQ(stalled_action, calm_action);
  EXPECT_LT(stalled, calm + 0.5);
  EXPECT_GT(mesh.peers[0]->queued(), 0u);
}

}  // namespace
}  // namespace duelist
