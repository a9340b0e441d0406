// Client transaction runtime. A transaction is a program over a local mirror
// of the store: reads come from the mirror (missing keys are fetched with a
// plain read transaction first), writes are buffered, and the submitted
// request carries the read values as compares so the store can validate
// them. On abort the corrections refresh the mirror and the program re-runs
// immediately with a fresh transaction id.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gotthard/wire.hpp"

namespace gotthard {

class LocalCache {
 public:
  bool contains(std::uint32_t key) const { return map_.count(key) != 0; }

  const Value128& get(std::uint32_t key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw std::out_of_range("LocalCache: key not present");
    return it->second;
  }

  void put(std::uint32_t key, const Value128& value) { map_[key] = value; }

  // Any response payload refreshes the mirror: read results, confirmed
  // writes, and abort corrections all carry current store values.
  void apply(const std::vector<Operation>& ops) {
    for (const auto& op : ops) map_[op.key] = op.value;
  }

  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::uint32_t, Value128> map_;
};

// Execution context handed to a transaction program. Records the read and
// write sets; reads of keys the mirror has never seen are noted so the
// runtime can fetch them and re-run the program.
class TxnContext {
 public:
  explicit TxnContext(const LocalCache& cache) : cache_(cache) {}

  // Mirror read. The returned value is zero for unknown keys, which the
  // runtime treats as a placeholder: the program will be re-run once the
  // real value has been fetched.
  Value128 read(std::uint32_t key) {
    for (const auto& w : writes_)
      if (w.key == key) return w.value;  // read-your-own-write
    if (cache_.contains(key)) {
      if (read_keys_.insert(key).second) compares_.push_back({key, cache_.get(key)});
      return cache_.get(key);
    }
    if (missing_seen_.insert(key).second) missing_.push_back(key);
    return Value128::zero();
  }

  void write(std::uint32_t key, const Value128& value) {
    for (auto& w : writes_) {
      if (w.key == key) {
        w.value = value;
        return;
      }
    }
    writes_.push_back({key, value});
  }

  // Uncached wire read: asks the store for the value instead of the mirror.
  // The result lands in the mirror when the response arrives.
  void remote_read(std::uint32_t key) {
    if (remote_seen_.insert(key).second) remote_reads_.push_back(key);
  }

  const std::vector<KeyValue>& compares() const { return compares_; }
  const std::vector<KeyValue>& writes() const { return writes_; }
  const std::vector<std::uint32_t>& remote_reads() const { return remote_reads_; }
  const std::vector<std::uint32_t>& missing() const { return missing_; }

 private:
  const LocalCache& cache_;
  std::vector<KeyValue> compares_;
  std::vector<KeyValue> writes_;
  std::vector<std::uint32_t> remote_reads_;
  std::vector<std::uint32_t> missing_;
  std::unordered_set<std::uint32_t> read_keys_;
  std::unordered_set<std::uint32_t> remote_seen_;
  std::unordered_set<std::uint32_t> missing_seen_;
};

using TxnProgram = std::function<void(TxnContext&)>;

enum class TxnKind : std::uint8_t {
  Read,
  Increment,
  NewOrder,
  Payment,
  OrderStatus,
  Delivery,
  StockLevel,
};

inline const char* to_string(TxnKind k) {
  switch (k) {
    case TxnKind::Read: return "read";
    case TxnKind::Increment: return "increment";
    case TxnKind::NewOrder: return "new_order";
    case TxnKind::Payment: return "payment";
    case TxnKind::OrderStatus: return "order_status";
    case TxnKind::Delivery: return "delivery";
    case TxnKind::StockLevel: return "stock_level";
  }
  return "?";
}

struct LabeledProgram {
  TxnProgram fn;
  TxnKind kind = TxnKind::Read;
};

// Produces the next transaction for a closed-loop client. Implementations
// seed their own generators so runs replay exactly.
struct ProgramSource {
  virtual ~ProgramSource() = default;
  virtual LabeledProgram next() = 0;
};

struct TxnOutcome {
  TxnKind kind = TxnKind::Read;
  std::uint64_t started_us = 0;    // first wire submission, fetch rounds included
  std::uint64_t completed_us = 0;  // arrival of the final OK
  std::uint32_t attempts = 0;      // submissions, i.e. aborts observed + 1
  std::uint32_t fetch_rounds = 0;
  std::uint32_t switch_aborts = 0;
  std::uint32_t store_aborts = 0;

  std::uint64_t latency_us() const { return completed_us - started_us; }
};

struct ClientStats {
  std::uint64_t committed = 0;
  std::uint64_t submits_sent = 0;
  std::uint64_t fetches_sent = 0;
  std::uint64_t fetches_completed = 0;
  std::uint64_t switch_aborts = 0;
  std::uint64_t store_aborts = 0;
  std::uint64_t stale_responses = 0;
};

// One logical transaction in flight at a time (closed loop). The caller owns
// the transport: it sends whatever a step hands back and feeds response
// fragments in.
class Client {
 public:
  struct Step {
    std::vector<Message> to_send;
    std::optional<TxnOutcome> outcome;
  };

  Client() = default;

  Step begin(LabeledProgram program, std::uint64_t now_us) {
    if (phase_ != Phase::Idle) throw std::logic_error("Client::begin: transaction in flight");
    program_ = std::move(program);
    started_us_ = now_us;
    attempts_ = 0;
    fetch_rounds_ = 0;
    switch_aborts_ = 0;
    store_aborts_ = 0;
    return execute(now_us);
  }

  Step on_response(const Message& msg, std::uint64_t now_us) {
    if (msg.header.msg_type != MsgType::Response) {
      ++stats_.stale_responses;
      return {};
    }
    auto assembled = reassembler_.add(/*sender=*/0, msg, now_us);
    if (!assembled) return {};
    if (phase_ == Phase::Idle || assembled->txn_id != cur_txn_id_) {
      ++stats_.stale_responses;
      return {};
    }

    if (phase_ == Phase::Fetch) {
      cache_.apply(assembled->ops);
      ++stats_.fetches_completed;
      return execute(now_us);
    }

    if (assembled->status == TxnStatus::Ok) {
      cache_.apply(assembled->ops);
      ++stats_.committed;
      TxnOutcome out{program_.kind, started_us_, now_us, attempts_,
                     fetch_rounds_, switch_aborts_, store_aborts_};
      phase_ = Phase::Idle;
      return {{}, out};
    }

    // Abort: adopt the corrections and re-run the program immediately.
    cache_.apply(assembled->ops);
    if (assembled->from_switch) {
      ++switch_aborts_;
      ++stats_.switch_aborts;
    } else {
      ++store_aborts_;
      ++stats_.store_aborts;
    }
    return execute(now_us);
  }

  // Resend of the current request after a transport timeout. Deliberately
  // reuses the transaction id: it is the same attempt, not a retry.
  std::vector<Message> retransmit() const {
    if (phase_ == Phase::Idle) return {};
    return cur_messages_;
  }

  bool idle() const { return phase_ == Phase::Idle; }
  std::uint32_t current_txn_id() const { return cur_txn_id_; }
  const LocalCache& local_cache() const { return cache_; }
  LocalCache& local_cache() { return cache_; }
  const ClientStats& stats() const { return stats_; }

 private:
  enum class Phase { Idle, Fetch, Submit };

  static constexpr std::uint32_t kMaxFetchRounds = 100;

  Step execute(std::uint64_t now_us) {
    reassembler_.sweep(now_us);
    TxnContext ctx(cache_);
    program_.fn(ctx);

    TransactionSet txn;
    if (!ctx.missing().empty()) {
      if (++fetch_rounds_ > kMaxFetchRounds)
        throw std::logic_error("Client: fetch rounds exceed limit; program never stabilizes");
      phase_ = Phase::Fetch;
      txn.reads = ctx.missing();
      ++stats_.fetches_sent;
    } else {
      phase_ = Phase::Submit;
      ++attempts_;
      txn.compares = ctx.compares();
      txn.reads = ctx.remote_reads();
      txn.writes = ctx.writes();
      ++stats_.submits_sent;
    }
    cur_txn_id_ = next_txn_id_++;
    cur_messages_ = fragment_request(cur_txn_id_, txn);
    return {cur_messages_, std::nullopt};
  }

  Phase phase_ = Phase::Idle;
  LabeledProgram program_;
  LocalCache cache_;
  Reassembler reassembler_;
  std::uint64_t started_us_ = 0;
  std::uint32_t attempts_ = 0;
  std::uint32_t fetch_rounds_ = 0;
  std::uint32_t switch_aborts_ = 0;
  std::uint32_t store_aborts_ = 0;
  std::uint32_t cur_txn_id_ = 0;
  std::uint32_t next_txn_id_ = 1;
  std::vector<Message> cur_messages_;
  ClientStats stats_;
};

// Canonical single-key transactions used by the microbenchmarks.

inline TransactionSet make_read_txn(std::uint32_t key) {
  TransactionSet t;
  t.reads.push_back(key);
  return t;
}

// pre: the key has been observed (mirror holds a value to validate against).
inline TransactionSet make_increment_txn(const LocalCache& cache, std::uint32_t key) {
  TransactionSet t;
  const Value128& cur = cache.get(key);
  t.compares.push_back({key, cur});
  t.writes.push_back({key, counter_increment(cur)});
  return t;
}

inline LabeledProgram increment_program(std::uint32_t key) {
  return {[key](TxnContext& ctx) {
            Value128 v = ctx.read(key);
            ctx.write(key, counter_increment(v));
          },
          TxnKind::Increment};
}

inline LabeledProgram remote_read_program(std::uint32_t key) {
  return {[key](TxnContext& ctx) { ctx.remote_read(key); }, TxnKind::Read};
}

}  // namespace gotthard
