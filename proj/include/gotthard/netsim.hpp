// Deterministic discrete-event network. Nodes exchange datagrams over
// fixed-delay FIFO links in virtual microseconds; each node serializes its
// work through a per-message service time. Identical inputs and seeds replay
// identical event sequences, which a running trace hash makes checkable.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gotthard/client.hpp"
#include "gotthard/middlebox.hpp"
#include "gotthard/store.hpp"
#include "gotthard/wire.hpp"

namespace gotthard {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

// src is the originating endpoint and survives intermediate hops, so the
// store can key fragment reassembly by the true sender.
struct Datagram {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  Message msg;
};

class Simulator;

class SimNode {
 public:
  virtual ~SimNode() = default;
  virtual void on_start(Simulator&) {}
  virtual void on_datagram(Simulator&, Datagram d) = 0;
  // Called once per arriving message; may vary (e.g. seeded jitter).
  virtual std::uint64_t next_service_us() { return 0; }
};

class Simulator {
 public:
  NodeId add_node(SimNode* node) {
    nodes_.push_back(node);
    adj_.emplace_back();
    busy_until_.push_back(0);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void add_link(NodeId a, NodeId b, std::uint64_t delay_us) {
    adj_[a].push_back({b, delay_us});
    adj_[b].push_back({a, delay_us});
    routes_ready_ = false;
  }

  // Precomputes next hops by breadth-first search from every destination.
  void finalize_routes() {
    std::size_t n = nodes_.size();
    next_hop_.assign(n, std::vector<NodeId>(n, kNoNode));
    for (NodeId dst = 0; dst < n; ++dst) {
      std::queue<NodeId> q;
      q.push(dst);
      next_hop_[dst][dst] = dst;
      while (!q.empty()) {
        NodeId cur = q.front();
        q.pop();
        for (const auto& [peer, delay] : adj_[cur]) {
          (void)delay;
          if (next_hop_[peer][dst] == kNoNode) {
            next_hop_[peer][dst] = cur;
            q.push(peer);
          }
        }
      }
    }
    routes_ready_ = true;
  }

  std::uint64_t now() const { return now_; }

  void send(NodeId from, Datagram d) {
    NodeId next = next_hop_.at(from).at(d.dst);
    if (next == kNoNode)
      throw std::logic_error("Simulator::send: no route from " + std::to_string(from) +
                             " to " + std::to_string(d.dst));
    std::uint64_t delay = link_delay(from, next);
    push_event(now_ + delay, next, Phase::Arrive, std::move(d));
  }

  void request_stop() { stop_requested_ = true; }
  bool stop_requested() const { return stop_requested_; }

  // Runs until the virtual clock passes end_us, the queue drains, or a node
  // requests a stop. Returns false if the queue drained early (starvation).
  bool run_until(std::uint64_t end_us) {
    if (!routes_ready_) finalize_routes();
    if (!started_) {
      started_ = true;
      for (NodeId n = 0; n < nodes_.size(); ++n) push_event(0, n, Phase::Start, {});
    }
    bool drained = false;
    while (!stop_requested_) {
      if (queue_.empty()) {
        drained = true;
        break;
      }
      const Event& top = queue_.top();
      if (top.time > end_us) break;
      Event ev = std::move(const_cast<Event&>(queue_.top()));
      queue_.pop();
      now_ = ev.time;
      switch (ev.phase) {
        case Phase::Start:
          nodes_[ev.node]->on_start(*this);
          break;
        case Phase::Arrive: {
          std::uint64_t begin = std::max(now_, busy_until_[ev.node]);
          std::uint64_t done = begin + nodes_[ev.node]->next_service_us();
          busy_until_[ev.node] = done;
          if (done == now_) {
            deliver(ev.node, std::move(ev.dgram));
          } else {
            push_event(done, ev.node, Phase::Deliver, std::move(ev.dgram));
          }
          break;
        }
        case Phase::Deliver:
          deliver(ev.node, std::move(ev.dgram));
          break;
      }
      ++events_processed_;
    }
    if (now_ < end_us && !drained && !stop_requested_) now_ = end_us;
    return !drained;
  }

  std::uint64_t trace_hash() const { return trace_hash_; }
  std::uint64_t events_processed() const { return events_processed_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Phase : std::uint8_t { Start, Arrive, Deliver };

  struct Event {
    std::uint64_t time;
    std::uint64_t seq;  // global insertion order; keeps links FIFO and ties stable
    NodeId node;
    Phase phase;
    Datagram dgram;
  };

  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::uint64_t link_delay(NodeId a, NodeId b) const {
    for (const auto& [peer, delay] : adj_[a])
      if (peer == b) return delay;
    throw std::logic_error("Simulator: no link " + std::to_string(a) + "-" + std::to_string(b));
  }

  void push_event(std::uint64_t time, NodeId node, Phase phase, Datagram d) {
    queue_.push(Event{time, seq_++, node, phase, std::move(d)});
  }

  void deliver(NodeId node, Datagram d) {
    mix_trace(node, d);
    nodes_[node]->on_datagram(*this, std::move(d));
  }

  void mix_trace(NodeId node, const Datagram& d) {
    auto mix = [this](std::uint64_t v) {
      trace_hash_ ^= v;
      trace_hash_ *= 0x100000001b3ull;  // FNV-1a prime
    };
    mix(now_);
    mix(node);
    mix(d.src);
    mix(static_cast<std::uint64_t>(d.msg.header.txn_id) << 16 |
        static_cast<std::uint64_t>(d.msg.header.msg_type) << 8 |
        static_cast<std::uint64_t>(d.msg.header.status) << 4 |
        (d.msg.header.from_switch ? 2 : 0));
    mix(static_cast<std::uint64_t>(d.msg.header.frag_seq) << 8 | d.msg.header.op_cnt);
  }

  std::vector<SimNode*> nodes_;
  std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> adj_;
  std::vector<std::vector<NodeId>> next_hop_;
  std::vector<std::uint64_t> busy_until_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ull;  // FNV-1a offset basis
  std::uint64_t events_processed_ = 0;
  bool routes_ready_ = false;
  bool started_ = false;
  bool stop_requested_ = false;
};

// ---------------------------------------------------------------------------
// Node roles.

class StoreNode : public SimNode {
 public:
  explicit StoreNode(std::uint64_t service_us) : service_us_(service_us) {}

  void on_datagram(Simulator& sim, Datagram d) override {
    if (d.msg.header.msg_type != MsgType::Request) return;  // stray response
    auto assembled = reassembler_.add(d.src, d.msg, sim.now());
    if (!assembled) return;
    auto resp = store_.process(assembled->txn_id, ops_to_set(assembled->ops));
    for (auto& frag : response_messages(assembled->txn_id, resp))
      sim.send(self_, {self_, d.src, std::move(frag)});
  }

  std::uint64_t next_service_us() override { return service_us_; }

  void set_self(NodeId id) { self_ = id; }
  Store& store() { return store_; }

 private:
  NodeId self_ = kNoNode;
  std::uint64_t service_us_;
  Store store_;
  Reassembler reassembler_;
};

class SwitchNode : public SimNode {
 public:
  SwitchNode(SwitchMode mode, std::size_t cache_capacity, std::uint64_t service_us)
      : sw_(mode, cache_capacity), service_us_(service_us) {}

  void on_datagram(Simulator& sim, Datagram d) override {
    if (d.msg.header.msg_type == MsgType::Request) {
      auto action = sw_.on_client_request(d.msg);
      switch (action.kind) {
        case SwitchAction::Kind::ForwardToStore:
          sim.send(self_, {d.src, d.dst, std::move(action.msg)});
          break;
        case SwitchAction::Kind::RespondToClient:
          sim.send(self_, {self_, d.src, std::move(action.msg)});
          break;
        case SwitchAction::Kind::ForwardToClient:
          throw std::logic_error("SwitchNode: request cannot be forwarded to client");
      }
    } else {
      auto action = sw_.on_store_response(d.msg);
      sim.send(self_, {d.src, d.dst, std::move(action.msg)});
    }
  }

  std::uint64_t next_service_us() override { return service_us_; }

  void set_self(NodeId id) { self_ = id; }
  Switch& middlebox() { return sw_; }

 private:
  NodeId self_ = kNoNode;
  Switch sw_;
  std::uint64_t service_us_;
};

class ClientNode : public SimNode {
 public:
  using OutcomeSink = std::function<void(std::uint32_t, const TxnOutcome&)>;

  ClientNode(std::uint32_t index, ProgramSource* source, std::uint64_t service_us,
             std::uint64_t jitter_us, std::uint64_t jitter_seed)
      : index_(index), source_(source), service_us_(service_us), jitter_us_(jitter_us),
        jitter_rng_(jitter_seed) {}

  void on_start(Simulator& sim) override { begin_next(sim); }

  void on_datagram(Simulator& sim, Datagram d) override {
    if (d.msg.header.msg_type != MsgType::Response) return;
    auto step = client_.on_response(d.msg, sim.now());
    if (step.outcome) {
      if (sink_) sink_(index_, *step.outcome);
      begin_next(sim);
      return;
    }
    send_all(sim, step.to_send);
  }

  // Models client-side processing cost. The jitter term breaks the phase
  // lock that perfectly symmetric closed loops would otherwise settle into —
  // real clients never respond in identical time, and without it a fixed
  // arrival order at the store starves all but one contender forever.
  std::uint64_t next_service_us() override {
    std::uint64_t j = jitter_us_ ? jitter_rng_() % (jitter_us_ + 1) : 0;
    return service_us_ + j;
  }

  void set_self(NodeId id) { self_ = id; }
  void set_store(NodeId id) { store_ = id; }
  void set_sink(OutcomeSink sink) { sink_ = std::move(sink); }
  Client& client() { return client_; }
  std::uint32_t index() const { return index_; }

 private:
  void begin_next(Simulator& sim) {
    auto step = client_.begin(source_->next(), sim.now());
    send_all(sim, step.to_send);
  }

  void send_all(Simulator& sim, const std::vector<Message>& msgs) {
    for (const auto& m : msgs) sim.send(self_, {self_, store_, m});
  }

  NodeId self_ = kNoNode;
  NodeId store_ = kNoNode;
  std::uint32_t index_;
  ProgramSource* source_;
  Client client_;
  std::uint64_t service_us_;
  std::uint64_t jitter_us_;
  std::mt19937_64 jitter_rng_;
  OutcomeSink sink_;
};

// ---------------------------------------------------------------------------
// Topologies.

struct Topology {
  struct SwitchSpec {
    SwitchMode mode;
    bool edge = true;  // edge switches sit next to clients and run the mode under test
  };
  // link endpoints use role-local indices resolved when the system is built
  struct Link {
    enum class End { Client, Switch, Store };
    End a_kind;
    std::uint32_t a;
    End b_kind;
    std::uint32_t b;
    std::uint64_t delay_us;
  };

  std::uint32_t num_clients = 0;
  std::vector<SwitchSpec> switches;
  std::vector<Link> links;
  // group assignment for locality workloads; empty means a single group
  std::vector<std::uint32_t> client_group;
};

inline std::uint64_t ms_to_us(double ms) {
  return static_cast<std::uint64_t>(ms * 1000.0 + 0.5);
}

// client --(delta * rtt/2)-- switch --((1-delta) * rtt/2)-- store
inline Topology single_switch_topology(std::uint32_t num_clients, double rtt_ms, double delta,
                                       SwitchMode mode) {
  Topology t;
  t.num_clients = num_clients;
  t.switches.push_back({mode, true});
  std::uint64_t d_cs = ms_to_us(delta * rtt_ms / 2.0);
  std::uint64_t d_ss = ms_to_us((1.0 - delta) * rtt_ms / 2.0);
  using End = Topology::Link::End;
  for (std::uint32_t c = 0; c < num_clients; ++c)
    t.links.push_back({End::Client, c, End::Switch, 0, d_cs});
  t.links.push_back({End::Switch, 0, End::Store, 0, d_ss});
  return t;
}

// Two client groups behind their own edge switches, joined by a middle
// switch collocated with the store. The middle switch only forwards; the
// edge switches run the mode under test.
inline Topology locality_topology(std::uint32_t clients_per_group, double rtt_ms, double delta,
                                  SwitchMode mode) {
  Topology t;
  t.num_clients = clients_per_group * 2;
  t.switches.push_back({mode, true});                    // edge 0
  t.switches.push_back({mode, true});                    // edge 1
  t.switches.push_back({SwitchMode::Forward, false});    // middle, at the store
  std::uint64_t d_ce = ms_to_us(delta * rtt_ms / 2.0);
  std::uint64_t d_em = ms_to_us((1.0 - delta) * rtt_ms / 2.0);
  using End = Topology::Link::End;
  for (std::uint32_t c = 0; c < t.num_clients; ++c) {
    std::uint32_t group = c < clients_per_group ? 0 : 1;
    t.client_group.push_back(group);
    t.links.push_back({End::Client, c, End::Switch, group, d_ce});
  }
  t.links.push_back({End::Switch, 0, End::Switch, 2, d_em});
  t.links.push_back({End::Switch, 1, End::Switch, 2, d_em});
  t.links.push_back({End::Switch, 2, End::Store, 0, 0});
  return t;
}

// ---------------------------------------------------------------------------
// Assembled system: one store, the topology's switches, and a closed-loop
// client per program source.

struct ServiceParams {
  double store_service_ms = 0.1;
  double switch_service_ms = 0.01;
  double client_service_ms = 0.05;
  // Upper bound of the per-message uniform jitter at clients; seeded, so
  // runs stay reproducible.
  double client_jitter_ms = 2.0;
};

class SimSystem {
 public:
  SimSystem(const Topology& topo, const ServiceParams& services,
            std::vector<std::unique_ptr<ProgramSource>> sources, std::uint64_t seed,
            std::size_t cache_capacity,
            const std::vector<std::pair<std::uint32_t, Value128>>& population)
      : sources_(std::move(sources)) {
    if (sources_.size() != topo.num_clients)
      throw std::invalid_argument("SimSystem: one program source per client required");

    store_node_ = std::make_unique<StoreNode>(ms_to_us(services.store_service_ms));
    store_node_->store().populate(population);
    NodeId store_id = sim_.add_node(store_node_.get());
    store_node_->set_self(store_id);

    std::vector<NodeId> switch_ids;
    for (const auto& spec : topo.switches) {
      auto sw = std::make_unique<SwitchNode>(spec.mode, cache_capacity,
                                             ms_to_us(services.switch_service_ms));
      NodeId id = sim_.add_node(sw.get());
      sw->set_self(id);
      switch_nodes_.push_back(std::move(sw));
      switch_ids.push_back(id);
    }

    for (std::uint32_t c = 0; c < topo.num_clients; ++c) {
      auto client = std::make_unique<ClientNode>(c, sources_[c].get(),
                                                 ms_to_us(services.client_service_ms),
                                                 ms_to_us(services.client_jitter_ms),
                                                 seed * 0x9e3779b97f4a7c15ull + c);
      NodeId id = sim_.add_node(client.get());
      client->set_self(id);
      client->set_store(store_id);
      client_nodes_.push_back(std::move(client));
    }

    using End = Topology::Link::End;
    // node ids are assigned in construction order: store, switches, clients
    auto resolve = [&](End kind, std::uint32_t idx) -> NodeId {
      switch (kind) {
        case End::Client: return static_cast<NodeId>(1 + switch_ids.size() + idx);
        case End::Switch: return switch_ids.at(idx);
        case End::Store: return store_id;
      }
      return kNoNode;
    };
    for (const auto& link : topo.links)
      sim_.add_link(resolve(link.a_kind, link.a), resolve(link.b_kind, link.b), link.delay_us);
    sim_.finalize_routes();
  }

  void set_outcome_sink(ClientNode::OutcomeSink sink) {
    for (auto& c : client_nodes_) c->set_sink(sink);
  }

  bool run_until(std::uint64_t end_us) { return sim_.run_until(end_us); }

  Simulator& sim() { return sim_; }
  StoreNode& store_node() { return *store_node_; }
  SwitchNode& switch_node(std::size_t i) { return *switch_nodes_.at(i); }
  std::size_t switch_count() const { return switch_nodes_.size(); }
  ClientNode& client_node(std::size_t i) { return *client_nodes_.at(i); }
  std::size_t client_count() const { return client_nodes_.size(); }

 private:
  Simulator sim_;
  std::vector<std::unique_ptr<ProgramSource>> sources_;
  std::unique_ptr<StoreNode> store_node_;
  std::vector<std::unique_ptr<SwitchNode>> switch_nodes_;
  std::vector<std::unique_ptr<ClientNode>> client_nodes_;
};

}  // namespace gotthard
