// Real-UDP transport mirroring the simulator's message flow: a store daemon,
// a middlebox daemon, and a closed-loop client driver, all speaking the wire
// format over loopback or LAN sockets.
#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gotthard/client.hpp"
#include "gotthard/middlebox.hpp"
#include "gotthard/store.hpp"

namespace gotthard {

// Largest datagram we will send: standard Ethernet payload minus IP/UDP
// headers. Wire fragments are capped well below this.
inline constexpr std::size_t kMaxDatagramBytes = 1472;

struct Endpoint {
  std::uint32_t addr = 0;  // host byte order
  std::uint16_t port = 0;  // host byte order

  bool operator==(const Endpoint&) const = default;

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(addr) << 16) | port;
  }

  std::string to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u:%u", addr >> 24 & 0xff, addr >> 16 & 0xff,
                  addr >> 8 & 0xff, addr & 0xff, port);
    return buf;
  }
};

inline Endpoint parse_endpoint(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("endpoint: expected host:port, got '" + text + "'");
  std::string host = text.substr(0, colon);
  int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535)
    throw std::invalid_argument("endpoint: port out of range in '" + text + "'");
  in_addr addr{};
  if (inet_pton(AF_INET, host.c_str(), &addr) != 1)
    throw std::invalid_argument("endpoint: bad IPv4 address '" + host + "'");
  return {ntohl(addr.s_addr), static_cast<std::uint16_t>(port)};
}

class UdpSocket {
 public:
  // Binds to the endpoint; port 0 picks an ephemeral port.
  explicit UdpSocket(const Endpoint& bind_to) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(bind_to.addr);
    sa.sin_port = htons(bind_to.port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
      int err = errno;
      ::close(fd_);
      throw std::runtime_error("bind " + bind_to.to_string() + ": " + std::strerror(err));
    }
  }

  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  ~UdpSocket() {
    if (fd_ >= 0) ::close(fd_);
  }

  Endpoint local() const {
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&sa), &len) != 0)
      throw std::runtime_error("getsockname: " + std::string(std::strerror(errno)));
    return {ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)};
  }

  void send_to(const Endpoint& dst, const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() > kMaxDatagramBytes)
      throw std::invalid_argument("send_to: datagram of " + std::to_string(bytes.size()) +
                                  " bytes exceeds " + std::to_string(kMaxDatagramBytes));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(dst.addr);
    sa.sin_port = htons(dst.port);
    ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                         reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
    if (n < 0) throw std::runtime_error("sendto: " + std::string(std::strerror(errno)));
  }

  // Waits up to timeout_ms for one datagram; nullopt on timeout.
  std::optional<std::pair<Endpoint, std::vector<std::uint8_t>>> recv_from(int timeout_ms) {
    pollfd pfd{fd_, POLLIN, 0};
    int r = ::poll(&pfd, 1, timeout_ms);
    if (r < 0) {
      if (errno == EINTR) return std::nullopt;
      throw std::runtime_error("poll: " + std::string(std::strerror(errno)));
    }
    if (r == 0) return std::nullopt;
    std::vector<std::uint8_t> buf(kMaxDatagramBytes + 1);
    sockaddr_in sa{};
    socklen_t len = sizeof(sa);
    ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0,
                           reinterpret_cast<sockaddr*>(&sa), &len);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) return std::nullopt;
      throw std::runtime_error("recvfrom: " + std::string(std::strerror(errno)));
    }
    buf.resize(static_cast<std::size_t>(n));
    return std::make_pair(Endpoint{ntohl(sa.sin_addr.s_addr), ntohs(sa.sin_port)},
                          std::move(buf));
  }

 private:
  int fd_ = -1;
};

inline std::uint64_t steady_now_us() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::steady_clock::now().time_since_epoch())
                                        .count());
}

// ---------------------------------------------------------------------------
// Store daemon: reassembles per-sender requests, executes them, and answers
// to the sender. Runs until stop() is called from another thread.

class StoreDaemon {
 public:
  struct Counters {
    std::uint64_t requests = 0;
    std::uint64_t responses = 0;
    std::uint64_t malformed = 0;
  };

  StoreDaemon(const Endpoint& listen,
              const std::vector<std::pair<std::uint32_t, Value128>>& population)
      : sock_(listen) {
    store_.populate(population);
  }

  Endpoint local() const { return sock_.local(); }
  Store& store() { return store_; }
  const Counters& counters() const { return counters_; }
  void stop() { stop_.store(true); }

  void run(std::uint64_t stats_interval_s = 0, std::FILE* stats_out = nullptr) {
    std::uint64_t next_stats =
        stats_interval_s ? steady_now_us() + stats_interval_s * 1'000'000 : 0;
    while (!stop_.load()) {
      auto got = sock_.recv_from(50);
      std::uint64_t now = steady_now_us();
      reasm_.sweep(now);
      if (stats_interval_s && now >= next_stats) {
        print_stats(stats_out ? stats_out : stdout);
        next_stats = now + stats_interval_s * 1'000'000;
      }
      if (!got) continue;
      handle(got->first, got->second, now);
    }
  }

  // Processes a single datagram; exposed so tests can drive the daemon
  // without threads.
  void handle(const Endpoint& from, const std::vector<std::uint8_t>& bytes,
              std::uint64_t now_us) {
    ++counters_.requests;
    Message msg;
    try {
      msg = decode(bytes);
    } catch (const WireError&) {
      ++counters_.malformed;
      return;
    }
    if (msg.header.msg_type != MsgType::Request) {
      ++counters_.malformed;
      return;
    }
    std::optional<Reassembler::Assembled> txn;
    try {
      txn = reasm_.add(from.key(), msg, now_us);
    } catch (const ReassemblyError&) {
      ++counters_.malformed;
      return;
    }
    if (!txn) return;
    auto resp = store_.process(txn->txn_id, ops_to_set(txn->ops));
    for (const auto& frag : response_messages(txn->txn_id, resp)) {
      sock_.send_to(from, encode(frag));
      ++counters_.responses;
    }
  }

 private:
  void print_stats(std::FILE* out) {
    const auto& s = store_.stats();
    std::fprintf(out, "store: requests=%llu responses=%llu commits=%llu aborts=%llu malformed=%llu\n",
                 static_cast<unsigned long long>(counters_.requests),
                 static_cast<unsigned long long>(counters_.responses),
                 static_cast<unsigned long long>(s.commits),
                 static_cast<unsigned long long>(s.aborts),
                 static_cast<unsigned long long>(counters_.malformed));
    std::fflush(out);
  }

  UdpSocket sock_;
  Store store_;
  Reassembler reasm_;
  Counters counters_;
  std::atomic<bool> stop_{false};
};

// ---------------------------------------------------------------------------
// Middlebox daemon: sits between clients and the store. Requests flow
// client→switch→store, responses store→switch→client. Responses are routed
// back by transaction id, so each in-flight txn_id maps to the client that
// sent it.

class SwitchDaemon {
 public:
  struct Counters {
    std::uint64_t client_requests = 0;
    std::uint64_t store_responses = 0;
    std::uint64_t switch_replies = 0;
    std::uint64_t malformed_forwarded = 0;
    std::uint64_t unroutable_dropped = 0;
  };

  SwitchDaemon(const Endpoint& listen, const Endpoint& store_addr, SwitchMode mode,
               std::size_t cache_capacity = 1024)
      : sock_(listen), store_addr_(store_addr), sw_(mode, cache_capacity) {}

  Endpoint local() const { return sock_.local(); }
  Switch& middlebox() { return sw_; }
  const Counters& counters() const { return counters_; }
  void stop() { stop_.store(true); }

  void run() {
    while (!stop_.load()) {
      auto got = sock_.recv_from(50);
      if (!got) continue;
      handle(got->first, got->second);
    }
  }

  void handle(const Endpoint& from, const std::vector<std::uint8_t>& bytes) {
    Message msg;
    try {
      msg = decode(bytes);
    } catch (const WireError&) {
      if (from == store_addr_) {
        // Unparseable store traffic has no routable destination.
        ++counters_.unroutable_dropped;
      } else {
        // fail-open: client traffic we cannot parse is pushed onward
        // untouched rather than black-holed.
        ++counters_.malformed_forwarded;
        sock_.send_to(store_addr_, bytes);
      }
      return;
    }

    if (msg.header.msg_type == MsgType::Request) {
      ++counters_.client_requests;
      remember_route(msg.header.txn_id, from);
      auto action = sw_.on_client_request(msg);
      switch (action.kind) {
        case SwitchAction::Kind::ForwardToStore:
          sock_.send_to(store_addr_, encode(action.msg));
          break;
        case SwitchAction::Kind::RespondToClient:
          sock_.send_to(from, encode(action.msg));
          ++counters_.switch_replies;
          break;
        case SwitchAction::Kind::ForwardToClient:
          break;  // not produced for requests
      }
      return;
    }

    ++counters_.store_responses;
    auto action = sw_.on_store_response(msg);
    auto client = route_for(msg.header.txn_id);
    if (!client) {
      ++counters_.unroutable_dropped;
      return;
    }
    sock_.send_to(*client, encode(action.msg));
  }

 private:
  static constexpr std::size_t kMaxRoutes = 65536;

  void remember_route(std::uint32_t txn_id, const Endpoint& client) {
    auto [it, inserted] = routes_.insert_or_assign(txn_id, client);
    (void)it;
    if (inserted) {
      route_order_.push_back(txn_id);
      while (route_order_.size() > kMaxRoutes) {
        routes_.erase(route_order_.front());
        route_order_.pop_front();
      }
    }
  }

  std::optional<Endpoint> route_for(std::uint32_t txn_id) const {
    auto it = routes_.find(txn_id);
    if (it == routes_.end()) return std::nullopt;
    return it->second;
  }

  UdpSocket sock_;
  Endpoint store_addr_;
  Switch sw_;
  std::unordered_map<std::uint32_t, Endpoint> routes_;
  std::deque<std::uint32_t> route_order_;
  Counters counters_;
  std::atomic<bool> stop_{false};
};

// ---------------------------------------------------------------------------
// Closed-loop client driver: runs a program source against a server (switch
// or store) with a retransmit timeout, collecting outcomes.

class UdpClientDriver {
 public:
  explicit UdpClientDriver(const Endpoint& server, std::uint64_t retransmit_timeout_ms = 1000,
                           const Endpoint& bind_to = Endpoint{0, 0})
      : sock_(bind_to), server_(server), retransmit_us_(retransmit_timeout_ms * 1000) {}

  // Runs `count` transactions to completion; returns their outcomes.
  std::vector<TxnOutcome> run_transactions(ProgramSource& source, std::uint64_t count) {
    return run_loop(source, count, 0);
  }

  // Runs transactions until the wall-clock budget expires; the transaction
  // in flight at expiry still completes.
  std::vector<TxnOutcome> run_for(ProgramSource& source, std::uint64_t duration_s) {
    return run_loop(source, 0, duration_s * 1'000'000);
  }

  Client& client() { return client_; }
  std::uint64_t retransmits() const { return retransmits_; }

 private:
  std::vector<TxnOutcome> run_loop(ProgramSource& source, std::uint64_t count,
                                   std::uint64_t budget_us) {
    std::uint64_t deadline = budget_us ? steady_now_us() + budget_us : 0;
    std::vector<TxnOutcome> outcomes;
    while (count ? outcomes.size() < count : steady_now_us() < deadline) {
      auto step = client_.begin(source.next(), steady_now_us());
      send_all(step.to_send);
      std::uint64_t last_send = steady_now_us();
      while (true) {
        auto got = sock_.recv_from(5);
        std::uint64_t now = steady_now_us();
        if (got) {
          Message msg;
          try {
            msg = decode(got->second);
          } catch (const WireError&) {
            continue;
          }
          auto next = client_.on_response(msg, now);
          if (next.outcome) {
            outcomes.push_back(*next.outcome);
            break;
          }
          if (!next.to_send.empty()) {
            send_all(next.to_send);
            last_send = now;
          }
          continue;
        }
        if (now - last_send >= retransmit_us_) {
          send_all(client_.retransmit());
          last_send = now;
          ++retransmits_;
        }
      }
    }
    return outcomes;
  }

  void send_all(const std::vector<Message>& msgs) {
    for (const auto& m : msgs) sock_.send_to(server_, encode(m));
  }

  UdpSocket sock_;
  Endpoint server_;
  Client client_;
  std::uint64_t retransmit_us_;
  std::uint64_t retransmits_ = 0;
};

}  // namespace gotthard
