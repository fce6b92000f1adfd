#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duelist/tt.hpp"

namespace duelist {

// Wire format, little-endian throughout:
//   frame = u32 body_length, body
//   body  = u32 magic, u8 version, u16 peer_id, u32 count, count x entry
//   entry = u64 hash, u64 checksum, u8 depth, f64 value
inline constexpr std::uint32_t kFrameMagic = 0x54544431;  // "1DTT" read little-endian
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 4 + 1 + 2 + 4;
inline constexpr std::size_t kEntryBytes = 8 + 8 + 1 + 8;
inline constexpr std::size_t kMaxFrameEntries = 1u << 16;

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Frame {
  std::uint16_t peer_id = 0;
  std::vector<TTEntry> entries;  // origin_peer = peer_id
};

// Full frame including the length prefix.
std::vector<std::uint8_t> encode_frame(std::uint16_t peer_id, const std::vector<TTEntry>& entries);
// Decodes a body (without the length prefix). Throws FrameError on a bad
// magic, version, count or length.
Frame decode_frame_body(const std::uint8_t* data, std::size_t size);

struct PeerConfig {
  std::uint16_t peer_id = 1;
  std::string listen_address = "127.0.0.1:0";  // port 0 picks a free port
  std::vector<std::string> peer_addresses;
  std::size_t batch_size = 512;  // entries per frame
  int flush_interval_ms = 50;
  std::size_t queue_capacity = 1u << 16;
  int entry_ttl = 0;  // turns a merged remote entry lives; 0 keeps it

  void validate() const;
};

// "host:port" -> (host, port). Throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text);

struct PeerStats {
  std::uint64_t enqueued = 0;
  std::uint64_t sent = 0;       // entries written to at least one neighbour
  std::uint64_t frames_sent = 0;
  std::uint64_t received = 0;
  std::uint64_t merged = 0;     // received entries that changed the table
  std::uint64_t dropped = 0;    // queue overflow, oldest first
  std::uint64_t malformed = 0;  // bad frames and non-finite values
  int outbound_connected = 0;
  int inbound_connected = 0;
};

// One gossip peer around a local table. Local stores are queued by a table
// listener and flushed to every reachable neighbour in batches; received
// entries are merged keep-deeper. Nothing on the search path ever waits on
// the network: enqueueing takes one short lock.
class DistributedTT {
 public:
  // Binds and starts the network thread. Throws std::runtime_error when the
  // listen address cannot be bound.
  DistributedTT(PeerConfig cfg, std::shared_ptr<TranspositionTable> table);
  ~DistributedTT();
  DistributedTT(const DistributedTT&) = delete;
  DistributedTT& operator=(const DistributedTT&) = delete;

  // Queues entries for the next flush. Never blocks on I/O.
  void broadcast(const std::vector<TTEntry>& entries);
  void broadcast(const TTEntry& entry);

  // Ages merged remote entries by one turn and evicts those older than
  // entry_ttl.
  void advance_turn();

  // Makes the next flush sleep on the network thread for `d`.
  void inject_stall(std::chrono::milliseconds d);

  std::uint16_t listen_port() const { return port_; }
  std::uint16_t peer_id() const { return cfg_.peer_id; }
  PeerStats stats() const;
  std::shared_ptr<TranspositionTable> table() const { return table_; }
  std::size_t queued() const;

  void stop();

 private:
  struct Impl;
  void deliver(const Frame& frame);

  PeerConfig cfg_;
  std::shared_ptr<TranspositionTable> table_;
  std::uint16_t port_ = 0;

  mutable std::mutex queue_mu_;
  std::deque<TTEntry> queue_;

  std::mutex age_mu_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> remote_age_;

  std::atomic<std::uint64_t> enqueued_{0}, sent_{0}, frames_sent_{0}, received_{0}, merged_{0}, dropped_{0},
      malformed_{0};
  std::atomic<long long> stall_ms_{0};
  std::unique_ptr<Impl> impl_;
};

}  // namespace duelist
