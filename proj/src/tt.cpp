#include "duelist/tt.hpp"

#include "duelist/hash.hpp"

namespace duelist {

namespace {

template <typename H>
void serialize(H& h, const BattleState& s) {
  h.add(static_cast<int>(s.weather));
  h.add(s.weather_turns);
  h.add(s.turn);
  h.add(s.winner);
  for (const auto& side : s.sides) {
    h.add(side.team_size);
    h.add(side.active);
    h.add(side.tailwind_turns);
    h.add(side.toxic_spikes);
    for (int i = 0; i < side.team_size; ++i) {
      const auto& p = side.team[i];
      h.add(p.species.value);
      h.add(p.level);
      h.add(p.hp);
      h.add(p.move_count);
      for (int m = 0; m < p.move_count; ++m) {
        h.add(p.moves[m].move.value);
        h.add(p.moves[m].pp);
      }
      h.add(p.ability.value);
      h.add(p.item.value);
      h.add(static_cast<int>(p.status));
      for (auto st : p.stages) h.add(st);
    }
  }
}

}  // namespace

TTKey state_key(const BattleState& state, std::uint64_t salt) {
  Hasher a(salt ^ 0x243f6a8885a308d3ULL), b(salt ^ 0x13198a2e03707344ULL);
  serialize(a, state);
  serialize(b, state);
  return {a.digest(), b.digest()};
}

TranspositionTable::TranspositionTable(std::size_t max_entries, std::uint16_t local_peer)
    : max_per_shard_(std::max<std::size_t>(1, max_entries / kShards)), local_peer_(local_peer) {}

std::optional<double> TranspositionTable::lookup(const TTKey& key, int depth) const {
  lookups_.fetch_add(1, std::memory_order_relaxed);
  auto& sh = shard(key);
  std::lock_guard lock(sh.mu);
  auto it = sh.map.find(key);
  if (it == sh.map.end() || it->second.depth < depth) return std::nullopt;
  hits_.fetch_add(1, std::memory_order_relaxed);
  return it->second.value;
}

void TranspositionTable::store(const TTKey& key, int depth, double value) {
  const auto d = static_cast<std::uint8_t>(depth);
  {
    auto& sh = shard(key);
    std::lock_guard lock(sh.mu);
    auto it = sh.map.find(key);
    if (it != sh.map.end()) {
      if (it->second.depth > d) return;
      it->second = {d, value, local_peer_};
    } else {
      if (sh.map.size() >= max_per_shard_) sh.map.clear();
      sh.map.emplace(key, Slot{d, value, local_peer_});
    }
  }
  if (listener_) listener_({key, d, value, local_peer_});
}

bool TranspositionTable::merge(const TTEntry& remote) {
  auto& sh = shard(remote.key);
  std::lock_guard lock(sh.mu);
  auto it = sh.map.find(remote.key);
  if (it == sh.map.end()) {
    if (sh.map.size() >= max_per_shard_) sh.map.clear();
    sh.map.emplace(remote.key, Slot{remote.depth, remote.value, remote.origin_peer});
    return true;
  }
  if (remote.depth > it->second.depth) {
    it->second = {remote.depth, remote.value, remote.origin_peer};
    return true;
  }
  return false;
}

std::optional<TTEntry> TranspositionTable::get(const TTKey& key) const {
  auto& sh = shard(key);
  std::lock_guard lock(sh.mu);
  auto it = sh.map.find(key);
  if (it == sh.map.end()) return std::nullopt;
  return TTEntry{key, it->second.depth, it->second.value, it->second.origin};
}

bool TranspositionTable::erase_remote(const TTKey& key) {
  auto& sh = shard(key);
  std::lock_guard lock(sh.mu);
  auto it = sh.map.find(key);
  if (it == sh.map.end() || it->second.origin == local_peer_) return false;
  sh.map.erase(it);
  return true;
}

std::size_t TranspositionTable::size() const {
  std::size_t n = 0;
  for (auto& sh : shards_) {
    std::lock_guard lock(sh.mu);
    n += sh.map.size();
  }
  return n;
}

void TranspositionTable::clear() {
  for (auto& sh : shards_) {
    std::lock_guard lock(sh.mu);
    sh.map.clear();
  }
}

std::vector<TTEntry> TranspositionTable::entries() const {
  std::vector<TTEntry> out;
  for (auto& sh : shards_) {
    std::lock_guard lock(sh.mu);
    for (const auto& [k, s] : sh.map) out.push_back({k, s.depth, s.value, s.origin});
  }
  return out;
}

}  // namespace duelist
