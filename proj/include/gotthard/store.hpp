// Single-copy optimistic key-value store. A transaction's compares are
// validated against current values; any mismatch aborts the whole
// transaction with corrections and leaves the store untouched, otherwise the
// writes apply atomically and the reads are answered. Serialization order is
// arrival order — the caller processes one transaction at a time.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "gotthard/wire.hpp"

namespace gotthard {

struct StoreResponse {
  TxnStatus status = TxnStatus::Ok;
  // ABORT: corrections (current values of mismatched compares), as Compare ops.
  // OK: applied writes first, then read results, as Write/Read ops.
  std::vector<Operation> payload;
};

struct CommitRecord {
  std::uint32_t txn_id = 0;
  std::vector<KeyValue> writes;
};

struct StoreStats {
  std::uint64_t commits = 0;
  std::uint64_t aborts = 0;
};

class Store {
 public:
  // One-shot initial load. Absent keys read as zero, so population is a
  // convenience, not a requirement.
  void populate(const std::vector<std::pair<std::uint32_t, Value128>>& pairs) {
    if (populated_ || !commit_log_.empty())
      throw std::logic_error("Store::populate: store is already in use");
    for (const auto& [k, v] : pairs) {
      if (!data_.emplace(k, v).second)
        throw std::invalid_argument("Store::populate: duplicate key " + std::to_string(k));
    }
    initial_ = pairs;
    populated_ = true;
  }

  StoreResponse process(std::uint32_t txn_id, const TransactionSet& txn) {
    StoreResponse resp;
    for (const auto& cmp : txn.compares) {
      const Value128& cur = lookup(cmp.key);
      if (cur != cmp.value) resp.payload.push_back({OpType::Compare, cmp.key, cur});
    }
    if (!resp.payload.empty()) {
      resp.status = TxnStatus::Abort;
      ++stats_.aborts;
      return resp;
    }

    for (const auto& w : txn.writes) data_[w.key] = w.value;
    for (const auto& w : txn.writes) resp.payload.push_back({OpType::Write, w.key, w.value});
    for (auto k : txn.reads) resp.payload.push_back({OpType::Read, k, lookup(k)});

    commit_log_.push_back({txn_id, txn.writes});
    ++stats_.commits;
    return resp;
  }

  // Ordered copy of current contents — zero-valued absent keys are not
  // materialized, so only explicitly written/populated keys appear.
  std::map<std::uint32_t, Value128> snapshot() const {
    return {data_.begin(), data_.end()};
  }

  const Value128& lookup(std::uint32_t key) const {
    auto it = data_.find(key);
    return it == data_.end() ? kZero : it->second;
  }

  const std::vector<CommitRecord>& commit_log() const { return commit_log_; }
  const std::vector<std::pair<std::uint32_t, Value128>>& initial_population() const {
    return initial_;
  }
  const StoreStats& stats() const { return stats_; }
  std::size_t size() const { return data_.size(); }

 private:
  inline static const Value128 kZero{};

  std::unordered_map<std::uint32_t, Value128> data_;
  std::vector<std::pair<std::uint32_t, Value128>> initial_;
  std::vector<CommitRecord> commit_log_;
  StoreStats stats_;
  bool populated_ = false;
};

// Replays a commit log over an initial population. Used to check that store
// state is exactly the effect of the committed history.
inline std::map<std::uint32_t, Value128> replay_log(
    const std::vector<std::pair<std::uint32_t, Value128>>& initial,
    const std::vector<CommitRecord>& log) {
  std::map<std::uint32_t, Value128> data(initial.begin(), initial.end());
  for (const auto& rec : log)
    for (const auto& w : rec.writes) data[w.key] = w.value;
  return data;
}

// Store response as wire fragments addressed to the requesting client.
inline std::vector<Message> response_messages(std::uint32_t txn_id, const StoreResponse& resp) {
  return fragment_response(txn_id, resp.status, /*from_switch=*/false, resp.payload);
}

}  // namespace gotthard
