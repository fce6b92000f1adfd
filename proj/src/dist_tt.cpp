#include "duelist/dist_tt.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <thread>

#include <boost/asio.hpp>
#include <spdlog/spdlog.h>

namespace duelist {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  return v;
}

constexpr std::size_t kMaxBody = kFrameHeaderBytes + kMaxFrameEntries * kEntryBytes;
constexpr std::size_t kMaxPendingFrames = 256;

}  // namespace

std::vector<std::uint8_t> encode_frame(std::uint16_t peer_id, const std::vector<TTEntry>& entries) {
  if (entries.size() > kMaxFrameEntries) throw std::invalid_argument("too many entries for one frame");
  std::vector<std::uint8_t> out;
  const auto body = kFrameHeaderBytes + entries.size() * kEntryBytes;
  out.reserve(4 + body);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(body));
  put<std::uint32_t>(out, kFrameMagic);
  put<std::uint8_t>(out, kFrameVersion);
  put<std::uint16_t>(out, peer_id);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put<std::uint64_t>(out, e.key.hash);
    put<std::uint64_t>(out, e.key.checksum);
    put<std::uint8_t>(out, e.depth);
    put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(e.value));
  }
  return out;
}

Frame decode_frame_body(const std::uint8_t* data, std::size_t size) {
  if (size < kFrameHeaderBytes) throw FrameError("frame shorter than its header");
  if (get<std::uint32_t>(data) != kFrameMagic) throw FrameError("bad frame magic");
  if (data[4] != kFrameVersion) throw FrameError("unsupported frame version " + std::to_string(data[4]));
  Frame f;
  f.peer_id = get<std::uint16_t>(data + 5);
  const auto count = get<std::uint32_t>(data + 7);
  if (count > kMaxFrameEntries || size != kFrameHeaderBytes + std::size_t{count} * kEntryBytes) {
    throw FrameError("frame length does not match its entry count");
  }
  const std::uint8_t* p = data + kFrameHeaderBytes;
  f.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i, p += kEntryBytes) {
    TTEntry e;
    e.key.hash = get<std::uint64_t>(p);
    e.key.checksum = get<std::uint64_t>(p + 8);
    e.depth = p[16];
    e.value = std::bit_cast<double>(get<std::uint64_t>(p + 17));
    e.origin_peer = f.peer_id;
    f.entries.push_back(e);
  }
  return f;
}

void PeerConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (batch_size > kMaxFrameEntries) throw std::invalid_argument("batch size exceeds the frame limit");
  if (flush_interval_ms < 1) throw std::invalid_argument("flush interval must be >= 1 ms");
  if (queue_capacity < 1) throw std::invalid_argument("queue capacity must be >= 1");
  if (entry_ttl < 0) throw std::invalid_argument("entry ttl must be >= 0");
  parse_endpoint(listen_address);
  for (const auto& p : peer_addresses) parse_endpoint(p);
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw std::invalid_argument("expected host:port, got '" + text + "'");
  const auto port_text = text.substr(colon + 1);
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(port_text, &used);
  } catch (const std::exception&) {
  }
  if (used != port_text.size() || port < 0 || port > 65535) throw std::invalid_argument("bad port in '" + text + "'");
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

struct DistributedTT::Impl {
  struct Outbound {
    std::string host;
    std::uint16_t port;
    tcp::socket socket;
    asio::steady_timer retry;
    bool connected = false;
    bool writing = false;
    int backoff_ms = 50;
    std::deque<std::shared_ptr<std::vector<std::uint8_t>>> pending;
    Outbound(asio::io_context& io, std::string h, std::uint16_t p)
        : host(std::move(h)), port(p), socket(io), retry(io) {}
  };
  struct Inbound {
    tcp::socket socket;
    std::array<std::uint8_t, 4> length{};
    std::vector<std::uint8_t> body;
    explicit Inbound(tcp::socket s) : socket(std::move(s)) {}
  };

  explicit Impl(DistributedTT& o) : owner(o) {}

  void accept();
  void read_frame(const std::shared_ptr<Inbound>& conn);
  void drop(const std::shared_ptr<Inbound>& conn);
  void connect(Outbound* o);
  void write_next(Outbound* o);
  void schedule_flush();
  void flush();

  DistributedTT& owner;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  asio::steady_timer flush_timer{io};
  std::vector<std::unique_ptr<Outbound>> out;
  std::vector<std::shared_ptr<Inbound>> in;
  std::thread thread;
  std::atomic<bool> stopping{false};
  std::atomic<int> outbound_connected{0};
  std::atomic<int> inbound_connected{0};
};

void DistributedTT::Impl::accept() {
  acceptor.async_accept([this](boost::system::error_code ec, tcp::socket s) {
    if (ec) return;
    auto conn = std::make_shared<Inbound>(std::move(s));
    in.push_back(conn);
    ++inbound_connected;
    read_frame(conn);
    accept();
  });
}

void DistributedTT::Impl::drop(const std::shared_ptr<Inbound>& conn) {
  boost::system::error_code ignored;
  conn->socket.close(ignored);
  const auto it = std::find(in.begin(), in.end(), conn);
  if (it == in.end()) return;
  in.erase(it);
  --inbound_connected;
}

void DistributedTT::Impl::read_frame(const std::shared_ptr<Inbound>& conn) {
  asio::async_read(conn->socket, asio::buffer(conn->length), [this, conn](boost::system::error_code ec, std::size_t) {
    if (ec) return drop(conn);
    const auto n = get<std::uint32_t>(conn->length.data());
    if (n > kMaxBody) {
      ++owner.malformed_;
      return drop(conn);
    }
    conn->body.resize(n);
    asio::async_read(conn->socket, asio::buffer(conn->body), [this, conn](boost::system::error_code ec2, std::size_t) {
      if (ec2) return drop(conn);
      try {
        owner.deliver(decode_frame_body(conn->body.data(), conn->body.size()));
      } catch (const FrameError& e) {
        ++owner.malformed_;
        spdlog::debug("peer {}: dropped frame: {}", owner.cfg_.peer_id, e.what());
      }
      read_frame(conn);
    });
  });
}

// Outbound connections retry with doubling backoff up to two seconds.
void DistributedTT::Impl::connect(Outbound* o) {
  boost::system::error_code ec;
  const auto addr = asio::ip::make_address(o->host, ec);
  if (ec) {
    spdlog::warn("peer {}: cannot parse neighbour address {}", owner.cfg_.peer_id, o->host);
    return;
  }
  o->socket = tcp::socket(io);
  o->socket.async_connect(tcp::endpoint(addr, o->port), [this, o](boost::system::error_code ec2) {
    if (stopping) return;
    if (ec2) {
      spdlog::debug("peer {}: {}:{} unreachable ({}), retrying in {} ms", owner.cfg_.peer_id, o->host, o->port,
                    ec2.message(), o->backoff_ms);
      o->retry.expires_after(std::chrono::milliseconds(o->backoff_ms));
      o->backoff_ms = std::min(o->backoff_ms * 2, 2000);
      o->retry.async_wait([this, o](boost::system::error_code e) {
        if (!e) connect(o);
      });
      return;
    }
    boost::system::error_code ignored;
    o->socket.set_option(tcp::no_delay(true), ignored);
    o->connected = true;
    o->backoff_ms = 50;
    ++outbound_connected;
    spdlog::debug("peer {}: connected to {}:{}", owner.cfg_.peer_id, o->host, o->port);
  });
}

void DistributedTT::Impl::write_next(Outbound* o) {
  if (o->writing || o->pending.empty() || !o->connected) return;
  o->writing = true;
  auto frame = o->pending.front();
  asio::async_write(o->socket, asio::buffer(*frame), [this, o, frame](boost::system::error_code ec, std::size_t) {
    o->writing = false;
    if (ec) {
      if (stopping) return;
      spdlog::debug("peer {}: lost {}:{} ({})", owner.cfg_.peer_id, o->host, o->port, ec.message());
      boost::system::error_code ignored;
      o->socket.close(ignored);
      o->connected = false;
      --outbound_connected;
      connect(o);
      return;
    }
    o->pending.pop_front();
    write_next(o);
  });
}

void DistributedTT::Impl::schedule_flush() {
  flush_timer.expires_after(std::chrono::milliseconds(owner.cfg_.flush_interval_ms));
  flush_timer.async_wait([this](boost::system::error_code ec) {
    if (ec || stopping) return;
    flush();
    schedule_flush();
  });
}

// Entries stay queued while no neighbour is connected.
void DistributedTT::Impl::flush() {
  if (const auto stall = owner.stall_ms_.exchange(0); stall > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(stall));
  }
  if (std::none_of(out.begin(), out.end(), [](const auto& o) { return o->connected; })) return;
  std::deque<TTEntry> batch;
  {
    std::lock_guard lock(owner.queue_mu_);
    batch.swap(owner.queue_);
  }
  const auto batch_size = owner.cfg_.batch_size;
  while (!batch.empty()) {
    const auto n = std::min(batch.size(), batch_size);
    const std::vector<TTEntry> entries(batch.begin(), batch.begin() + static_cast<long>(n));
    batch.erase(batch.begin(), batch.begin() + static_cast<long>(n));
    auto frame = std::make_shared<std::vector<std::uint8_t>>(encode_frame(owner.cfg_.peer_id, entries));
    for (const auto& o : out) {
      if (!o->connected) continue;
      if (o->pending.size() >= kMaxPendingFrames) o->pending.pop_front();
      o->pending.push_back(frame);
      write_next(o.get());
    }
    owner.sent_ += n;
    ++owner.frames_sent_;
  }
}

DistributedTT::DistributedTT(PeerConfig cfg, std::shared_ptr<TranspositionTable> table)
    : cfg_(std::move(cfg)), table_(std::move(table)) {
  cfg_.validate();
  if (!table_) throw std::invalid_argument("distributed table needs a local table");
  impl_ = std::make_unique<Impl>(*this);
  auto& im = *impl_;

  const auto [host, port] = parse_endpoint(cfg_.listen_address);
  try {
    const tcp::endpoint ep(asio::ip::make_address(host), port);
    im.acceptor.open(ep.protocol());
    im.acceptor.set_option(tcp::acceptor::reuse_address(true));
    im.acceptor.bind(ep);
    im.acceptor.listen();
    port_ = im.acceptor.local_endpoint().port();
  } catch (const std::exception& e) {
    throw std::runtime_error("peer " + std::to_string(cfg_.peer_id) + ": cannot listen on " + cfg_.listen_address +
                             ": " + e.what());
  }
  im.accept();
  for (const auto& addr : cfg_.peer_addresses) {
    const auto [h, p] = parse_endpoint(addr);
    im.out.push_back(std::make_unique<Impl::Outbound>(im.io, h, p));
    im.connect(im.out.back().get());
  }
  im.schedule_flush();
  table_->set_listener([this](const TTEntry& e) { broadcast(e); });
  im.thread = std::thread([this] { impl_->io.run(); });
  spdlog::info("peer {} listening on {}:{} with {} neighbour(s)", cfg_.peer_id, host, port_, cfg_.peer_addresses.size());
}

DistributedTT::~DistributedTT() { stop(); }

void DistributedTT::stop() {
  if (!impl_ || impl_->stopping.exchange(true)) return;
  table_->set_listener(nullptr);
  asio::post(impl_->io, [this] {
    boost::system::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->flush_timer.cancel();
    for (auto& o : impl_->out) {
      o->retry.cancel();
      o->socket.close(ignored);
    }
    for (auto& c : impl_->in) c->socket.close(ignored);
    impl_->io.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
}

void DistributedTT::broadcast(const TTEntry& entry) {
  if (cfg_.peer_addresses.empty()) return;
  std::lock_guard lock(queue_mu_);
  if (queue_.size() >= cfg_.queue_capacity) {
    queue_.pop_front();
    dropped_.fetch_add(1, std::memory_order_relaxed);
  }
  queue_.push_back(entry);
  enqueued_.fetch_add(1, std::memory_order_relaxed);
}

void DistributedTT::broadcast(const std::vector<TTEntry>& entries) {
  for (const auto& e : entries) broadcast(e);
}

void DistributedTT::deliver(const Frame& frame) {
  for (const auto& e : frame.entries) {
    if (!std::isfinite(e.value)) {
      ++malformed_;
      continue;
    }
    ++received_;
    if (table_->merge(e)) {
      ++merged_;
      if (cfg_.entry_ttl > 0) {
        std::lock_guard lock(age_mu_);
        remote_age_[{e.key.hash, e.key.checksum}] = 0;
      }
    }
  }
}

void DistributedTT::advance_turn() {
  if (cfg_.entry_ttl <= 0) return;
  std::lock_guard lock(age_mu_);
  for (auto it = remote_age_.begin(); it != remote_age_.end();) {
    if (++it->second > cfg_.entry_ttl) {
      table_->erase_remote({it->first.first, it->first.second});
      it = remote_age_.erase(it);
    } else {
      ++it;
    }
  }
}

void DistributedTT::inject_stall(std::chrono::milliseconds d) { stall_ms_ = d.count(); }

std::size_t DistributedTT::queued() const {
  std::lock_guard lock(queue_mu_);
  return queue_.size();
}

PeerStats DistributedTT::stats() const {
  PeerStats s;
  s.enqueued = enqueued_;
  s.sent = sent_;
  s.frames_sent = frames_sent_;
  s.received = received_;
  s.merged = merged_;
  s.dropped = dropped_;
  s.malformed = malformed_;
  s.outbound_connected = impl_->outbound_connected;
  s.inbound_connected = impl_->inbound_connected;
  return s;
}

}  // namespace duelist
