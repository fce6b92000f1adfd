#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "duelist/state.hpp"

namespace duelist {

// 64-bit hash plus an independent 64-bit checksum of the same serialization.
struct TTKey {
  std::uint64_t hash = 0;
  std::uint64_t checksum = 0;
  bool operator==(const TTKey&) const = default;
  template <typename H>
  friend H AbslHashValue(H h, const TTKey& k) {
    return H::combine(std::move(h), k.hash, k.checksum);
  }
};

struct TTEntry {
  TTKey key;
  std::uint8_t depth = 0;  // lookahead turns remaining below the stored node
  double value = 0.0;
  std::uint16_t origin_peer = 0;
  bool operator==(const TTEntry&) const = default;
};

// Key of a state's canonical serialization, salted with everything else the
// stored value depends on (perspective, search settings, opponent history).
TTKey state_key(const BattleState& state, std::uint64_t salt);

// Sharded concurrent table. Stores replace on equal or greater depth (last
// writer wins on ties); merges of remote entries replace only on strictly
// greater depth.
class TranspositionTable {
 public:
  explicit TranspositionTable(std::size_t max_entries = 1u << 22, std::uint16_t local_peer = 0);

  // Value stored for `key` with depth >= `depth`.
  std::optional<double> lookup(const TTKey& key, int depth) const;
  void store(const TTKey& key, int depth, double value);
  // Returns true when the remote entry was inserted or replaced a shallower one.
  bool merge(const TTEntry& remote);
  std::optional<TTEntry> get(const TTKey& key) const;
  // Removes the entry for `key` unless it was stored locally. Returns true
  // when something was removed.
  bool erase_remote(const TTKey& key);

  std::size_t size() const;
  void clear();
  std::vector<TTEntry> entries() const;

  // Called after every local store with the stored entry; used for gossip.
  using Listener = std::function<void(const TTEntry&)>;
  void set_listener(Listener l) { listener_ = std::move(l); }

  std::uint64_t lookups() const { return lookups_.load(); }
  std::uint64_t hits() const { return hits_.load(); }

 private:
  static constexpr std::size_t kShards = 64;
  struct Slot {
    std::uint8_t depth;
    double value;
    std::uint16_t origin;
  };
  struct Shard {
    mutable std::mutex mu;
    absl::flat_hash_map<TTKey, Slot> map;
  };
  Shard& shard(const TTKey& k) const { return shards_[k.hash % kShards]; }

  mutable std::array<Shard, kShards> shards_;
  std::size_t max_per_shard_;
  std::uint16_t local_peer_;
  Listener listener_;
  mutable std::atomic<std::uint64_t> lookups_{0};
  mutable std::atomic<std::uint64_t> hits_{0};
};

}  // namespace duelist
