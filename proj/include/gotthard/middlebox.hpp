// In-network transaction middlebox. Sits between clients and the store and,
// depending on mode, either forwards traffic untouched, serves cached reads,
// or aborts doomed transactions early out of an optimistic write-through
// cache. Comparison is always by value — the cache never versions entries.
#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gotthard/wire.hpp"

namespace gotthard {

enum class SwitchMode { Forward, ReadCache, Gotthard };

inline const char* to_string(SwitchMode m) {
  switch (m) {
    case SwitchMode::Forward: return "forward";
    case SwitchMode::ReadCache: return "read_cache";
    case SwitchMode::Gotthard: return "gotthard";
  }
  return "?";
}

inline std::optional<SwitchMode> switch_mode_from_string(const std::string& s) {
  if (s == "forward") return SwitchMode::Forward;
  if (s == "read_cache") return SwitchMode::ReadCache;
  if (s == "gotthard") return SwitchMode::Gotthard;
  return std::nullopt;
}

// Fixed-capacity map with least-recently-used eviction. Any get or put marks
// the key most recent. Capacity zero disables caching entirely.
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  std::optional<Value128> get(std::uint32_t key) {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  void put(std::uint32_t key, const Value128& value) {
    if (capacity_ == 0) return;
    auto it = index_.find(key);
    if (it != index_.end()) {
      it->second->second = value;
      order_.splice(order_.begin(), order_, it->second);
      return;
    }
    order_.emplace_front(key, value);
    index_[key] = order_.begin();
    if (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  bool contains(std::uint32_t key) const { return index_.count(key) != 0; }
  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::list<std::pair<std::uint32_t, Value128>> order_;  // front = most recent
  std::unordered_map<std::uint32_t, std::list<std::pair<std::uint32_t, Value128>>::iterator>
      index_;
  std::size_t capacity_;
};

struct SwitchStats {
  std::uint64_t forwarded_requests = 0;   // requests passed through to the store
  std::uint64_t forwarded_responses = 0;  // responses passed through to clients
  std::uint64_t aborts_issued = 0;        // early aborts generated at the switch
  std::uint64_t oks_issued = 0;           // transactions answered OK at the switch
  std::uint64_t fragmented_passthrough = 0;
  std::uint64_t cache_writes = 0;
  std::uint64_t malformed = 0;
};

// What the caller (simulated link layer or UDP daemon) must do with a
// message after the switch has seen it.
struct SwitchAction {
  enum class Kind { ForwardToStore, ForwardToClient, RespondToClient } kind;
  Message msg;
};

class Switch {
 public:
  Switch(SwitchMode mode, std::size_t cache_capacity)
      : mode_(mode), cache_(cache_capacity) {}

  // Client-to-store direction. The returned ForwardToStore message is the
  // input message, bit for bit — the switch never rewrites what it forwards.
  SwitchAction on_client_request(const Message& msg) {
    // Multi-fragment transactions bypass switch processing entirely.
    if (msg.header.frag_count > 1) {
      ++stats_.fragmented_passthrough;
      return forward_to_store(msg);
    }
    switch (mode_) {
      case SwitchMode::Forward:
        return forward_to_store(msg);
      case SwitchMode::ReadCache:
        return read_cache_request(msg);
      case SwitchMode::Gotthard:
        return gotthard_request(msg);
    }
    return forward_to_store(msg);
  }

  // Store-to-client direction. Forward mode passes responses blindly; the
  // caching modes refresh their entries from the payload first.
  SwitchAction on_store_response(const Message& msg) {
    switch (mode_) {
      case SwitchMode::Forward:
        break;
      case SwitchMode::ReadCache:
        // Look-through cache: every response payload refreshes it, OK results
        // and abort corrections alike.
        for (const auto& op : msg.ops) {
          cache_.put(op.key, op.value);
          ++stats_.cache_writes;
        }
        break;
      case SwitchMode::Gotthard:
        // The optimistic cache is repaired only by abort corrections. OK
        // responses confirm values the cache already adopted at request time.
        if (msg.header.status == TxnStatus::Abort) {
          for (const auto& op : msg.ops) {
            cache_.put(op.key, op.value);
            ++stats_.cache_writes;
          }
        }
        break;
    }
    ++stats_.forwarded_responses;
    return {SwitchAction::Kind::ForwardToClient, msg};
  }

  SwitchMode mode() const { return mode_; }
  LruCache& cache() { return cache_; }
  const SwitchStats& stats() const { return stats_; }
  SwitchStats& mutable_stats() { return stats_; }

 private:
  SwitchAction forward_to_store(const Message& msg) {
    ++stats_.forwarded_requests;
    return {SwitchAction::Kind::ForwardToStore, msg};
  }

  SwitchAction read_cache_request(const Message& msg) {
    // Serve only transactions made purely of reads, and only fully from
    // cache; anything else goes to the store untouched.
    bool only_reads = !msg.ops.empty();
    for (const auto& op : msg.ops)
      if (op.type != OpType::Read) only_reads = false;
    if (!only_reads) return forward_to_store(msg);

    std::vector<Operation> results;
    results.reserve(msg.ops.size());
    for (const auto& op : msg.ops) {
      auto hit = cache_.get(op.key);
      if (!hit) return forward_to_store(msg);
      results.push_back({OpType::Read, op.key, *hit});
    }
    ++stats_.oks_issued;
    return respond(msg.header.txn_id, TxnStatus::Ok, std::move(results));
  }

  SwitchAction gotthard_request(const Message& msg) {
    // Validate compares against the optimistic cache. A key we have never
    // seen means we cannot judge the transaction: pass it to the store.
    std::vector<Operation> corrections;
    bool has_read_or_write = false;
    for (const auto& op : msg.ops) {
      if (op.type == OpType::Compare) {
        auto hit = cache_.get(op.key);
        if (!hit) return forward_to_store(msg);
        if (!(*hit == op.value)) corrections.push_back({OpType::Compare, op.key, *hit});
      } else {
        has_read_or_write = true;
      }
    }
    if (!corrections.empty()) {
      ++stats_.aborts_issued;
      return respond(msg.header.txn_id, TxnStatus::Abort, std::move(corrections));
    }
    if (has_read_or_write) {
      // Optimistic step: adopt the writes as if already committed, so a
      // conflicting transaction arriving next can be aborted here instead of
      // at the store.
      for (const auto& op : msg.ops) {
        if (op.type == OpType::Write) {
          cache_.put(op.key, op.value);
          ++stats_.cache_writes;
        }
      }
      return forward_to_store(msg);
    }
    // Compare-only transaction fully validated by the cache.
    ++stats_.oks_issued;
    return respond(msg.header.txn_id, TxnStatus::Ok, {});
  }

  SwitchAction respond(std::uint32_t txn_id, TxnStatus status, std::vector<Operation> payload) {
    // Switch responses always fit one fragment: corrections are a subset of
    // one inbound fragment's compares, reads a subset of its reads.
    auto msgs = fragment_response(txn_id, status, /*from_switch=*/true, std::move(payload));
    return {SwitchAction::Kind::RespondToClient, std::move(msgs.front())};
  }

  SwitchMode mode_;
  LruCache cache_;
  SwitchStats stats_;
};

}  // namespace gotthard
