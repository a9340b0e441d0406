// Wire codec: fixed 10-byte header plus 133-byte operation slots, big-endian
// throughout, with application-level fragmentation and reassembly.
//
// Header layout (offsets in bytes):
//   0  msg_type    0 = request, 1 = response
//   1  from_switch 0 = store/client origin, 1 = switch-generated response
//   2  txn_id      u32 big-endian
//   6  frag_count  total fragments in this message (>= 1)
//   7  frag_seq    fragment index, 0-based, < frag_count
//   8  status      0 = OK, 1 = ABORT (requests must carry OK)
//   9  op_cnt      operations in this fragment (<= 10)
//
// Operation layout (133 bytes): op_type u8, key u32 big-endian, value 128 B.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gotthard/value.hpp"

namespace gotthard {

inline constexpr std::size_t kHeaderBytes = 10;
inline constexpr std::size_t kOpBytes = 1 + 4 + kValueBytes;  // 133
inline constexpr std::size_t kMaxOpsPerFragment = 10;
inline constexpr std::size_t kMaxFragmentBytes =
    kHeaderBytes + kMaxOpsPerFragment * kOpBytes;  // 1340
inline constexpr std::size_t kMaxFragments = 255;
inline constexpr std::size_t kMaxOpsPerTxn = kMaxFragments * kMaxOpsPerFragment;

enum class MsgType : std::uint8_t { Request = 0, Response = 1 };
enum class TxnStatus : std::uint8_t { Ok = 0, Abort = 1 };
enum class OpType : std::uint8_t { Compare = 1, Read = 2, Write = 3 };

struct WireError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncodeError : WireError {
  using WireError::WireError;
};

// offset: byte position at which decoding failed.
struct DecodeError : WireError {
  std::size_t offset;
  DecodeError(const std::string& what, std::size_t off)
      : WireError(what + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

struct ReassemblyError : WireError {
  using WireError::WireError;
};

struct Operation {
  OpType type = OpType::Read;
  std::uint32_t key = 0;
  Value128 value{};

  bool operator==(const Operation&) const = default;
};

struct Header {
  MsgType msg_type = MsgType::Request;
  bool from_switch = false;
  std::uint32_t txn_id = 0;
  std::uint8_t frag_count = 1;
  std::uint8_t frag_seq = 0;
  TxnStatus status = TxnStatus::Ok;
  std::uint8_t op_cnt = 0;

  bool operator==(const Header&) const = default;
};

struct Message {
  Header header;
  std::vector<Operation> ops;

  bool operator==(const Message&) const = default;
};

struct KeyValue {
  std::uint32_t key = 0;
  Value128 value{};

  bool operator==(const KeyValue&) const = default;
};

// A transaction as the store evaluates it: optimistic compares, reads to
// answer, and writes to apply if every compare matches.
struct TransactionSet {
  std::vector<KeyValue> compares;
  std::vector<std::uint32_t> reads;
  std::vector<KeyValue> writes;

  bool operator==(const TransactionSet&) const = default;

  std::size_t op_count() const { return compares.size() + reads.size() + writes.size(); }
  bool empty() const { return op_count() == 0; }
};

namespace detail {

inline void check_header_invariants(const Header& h, const char* ctx) {
  if (h.frag_count == 0) throw EncodeError(std::string(ctx) + ": frag_count must be >= 1");
  if (h.frag_seq >= h.frag_count)
    throw EncodeError(std::string(ctx) + ": frag_seq out of range");
  if (h.msg_type == MsgType::Request && h.status != TxnStatus::Ok)
    throw EncodeError(std::string(ctx) + ": request carries non-OK status");
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Message& msg) {
  detail::check_header_invariants(msg.header, "encode");
  if (msg.ops.size() > kMaxOpsPerFragment)
    throw EncodeError("encode: fragment holds more than 10 operations");
  if (msg.ops.size() != msg.header.op_cnt)
    throw EncodeError("encode: op_cnt does not match operation list");

  std::vector<std::uint8_t> out(kHeaderBytes + msg.ops.size() * kOpBytes);
  out[0] = static_cast<std::uint8_t>(msg.header.msg_type);
  out[1] = msg.header.from_switch ? 1 : 0;
  detail::put_u32_be(out.data() + 2, msg.header.txn_id);
  out[6] = msg.header.frag_count;
  out[7] = msg.header.frag_seq;
  out[8] = static_cast<std::uint8_t>(msg.header.status);
  out[9] = msg.header.op_cnt;

  std::size_t off = kHeaderBytes;
  for (const auto& op : msg.ops) {
    out[off] = static_cast<std::uint8_t>(op.type);
    detail::put_u32_be(out.data() + off + 1, op.key);
    std::memcpy(out.data() + off + 5, op.value.bytes.data(), kValueBytes);
    off += kOpBytes;
  }
  return out;
}

inline Message decode(const std::uint8_t* data, std::size_t size) {
  if (size < kHeaderBytes) throw DecodeError("decode: truncated header", size);

  Message msg;
  if (data[0] > 1) throw DecodeError("decode: bad msg_type", 0);
  msg.header.msg_type = static_cast<MsgType>(data[0]);
  if (data[1] > 1) throw DecodeError("decode: bad from_switch", 1);
  msg.header.from_switch = data[1] == 1;
  msg.header.txn_id = detail::get_u32_be(data + 2);
  msg.header.frag_count = data[6];
  if (msg.header.frag_count == 0) throw DecodeError("decode: frag_count is zero", 6);
  msg.header.frag_seq = data[7];
  if (msg.header.frag_seq >= msg.header.frag_count)
    throw DecodeError("decode: frag_seq out of range", 7);
  if (data[8] > 1) throw DecodeError("decode: bad status", 8);
  msg.header.status = static_cast<TxnStatus>(data[8]);
  if (msg.header.msg_type == MsgType::Request && msg.header.status != TxnStatus::Ok)
    throw DecodeError("decode: request carries non-OK status", 8);
  msg.header.op_cnt = data[9];
  if (msg.header.op_cnt > kMaxOpsPerFragment)
    throw DecodeError("decode: op_cnt exceeds fragment limit", 9);
  if (size != kHeaderBytes + msg.header.op_cnt * kOpBytes)
    throw DecodeError("decode: length does not match op_cnt", size);

  msg.ops.reserve(msg.header.op_cnt);
  std::size_t off = kHeaderBytes;
  for (unsigned i = 0; i < msg.header.op_cnt; ++i) {
    Operation op;
    if (data[off] < 1 || data[off] > 3) throw DecodeError("decode: bad op_type", off);
    op.type = static_cast<OpType>(data[off]);
    op.key = detail::get_u32_be(data + off + 1);
    std::memcpy(op.value.bytes.data(), data + off + 5, kValueBytes);
    msg.ops.push_back(op);
    off += kOpBytes;
  }
  return msg;
}

inline Message decode(const std::vector<std::uint8_t>& bytes) {
  return decode(bytes.data(), bytes.size());
}

inline std::vector<Operation> set_to_ops(const TransactionSet& set) {
  std::vector<Operation> ops;
  ops.reserve(set.op_count());
  for (const auto& c : set.compares) ops.push_back({OpType::Compare, c.key, c.value});
  for (auto k : set.reads) ops.push_back({OpType::Read, k, Value128::zero()});
  for (const auto& w : set.writes) ops.push_back({OpType::Write, w.key, w.value});
  return ops;
}

inline TransactionSet ops_to_set(const std::vector<Operation>& ops) {
  TransactionSet set;
  for (const auto& op : ops) {
    switch (op.type) {
      case OpType::Compare: set.compares.push_back({op.key, op.value}); break;
      case OpType::Read: set.reads.push_back(op.key); break;
      case OpType::Write: set.writes.push_back({op.key, op.value}); break;
    }
  }
  return set;
}

// Splits an operation list into wire fragments of at most 10 ops. An empty
// list still produces one (op-free) fragment so the message itself travels.
inline std::vector<Message> fragment(MsgType msg_type, TxnStatus status, bool from_switch,
                                     std::uint32_t txn_id, std::vector<Operation> ops) {
  if (ops.size() > kMaxOpsPerTxn)
    throw EncodeError("fragment: transaction exceeds " + std::to_string(kMaxOpsPerTxn) +
                      " operations");
  std::size_t nfrag = ops.empty() ? 1 : (ops.size() + kMaxOpsPerFragment - 1) / kMaxOpsPerFragment;
  std::vector<Message> out;
  out.reserve(nfrag);
  for (std::size_t f = 0; f < nfrag; ++f) {
    Message m;
    m.header.msg_type = msg_type;
    m.header.from_switch = from_switch;
    m.header.txn_id = txn_id;
    m.header.frag_count = static_cast<std::uint8_t>(nfrag);
    m.header.frag_seq = static_cast<std::uint8_t>(f);
    m.header.status = status;
    std::size_t lo = f * kMaxOpsPerFragment;
    std::size_t hi = std::min(ops.size(), lo + kMaxOpsPerFragment);
    m.ops.assign(ops.begin() + lo, ops.begin() + hi);
    m.header.op_cnt = static_cast<std::uint8_t>(m.ops.size());
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Message> fragment_request(std::uint32_t txn_id, const TransactionSet& set) {
  return fragment(MsgType::Request, TxnStatus::Ok, false, txn_id, set_to_ops(set));
}

inline std::vector<Message> fragment_response(std::uint32_t txn_id, TxnStatus status,
                                              bool from_switch, std::vector<Operation> payload) {
  return fragment(MsgType::Response, status, from_switch, txn_id, std::move(payload));
}

// Reorders and deduplicates fragments until a transaction is whole. Partial
// transactions are keyed by (sender, txn_id) and dropped after a timeout in
// the caller's clock domain (virtual or wall microseconds).
class Reassembler {
 public:
  struct Assembled {
    std::uint32_t txn_id = 0;
    TxnStatus status = TxnStatus::Ok;
    bool from_switch = false;
    MsgType msg_type = MsgType::Request;
    std::vector<Operation> ops;
  };

  explicit Reassembler(std::uint64_t timeout_us = 5'000'000) : timeout_us_(timeout_us) {}

  std::optional<Assembled> add(std::uint64_t sender, const Message& msg, std::uint64_t now_us) {
    if (msg.header.frag_count == 1) {
      return Assembled{msg.header.txn_id, msg.header.status, msg.header.from_switch,
                       msg.header.msg_type, msg.ops};
    }

    auto key = std::make_pair(sender, msg.header.txn_id);
    auto it = partials_.find(key);
    if (it != partials_.end() && now_us - it->second.first_seen_us > timeout_us_) {
      partials_.erase(it);
      it = partials_.end();
    }
    if (it == partials_.end()) {
      Partial p;
      p.frag_count = msg.header.frag_count;
      p.status = msg.header.status;
      p.from_switch = msg.header.from_switch;
      p.msg_type = msg.header.msg_type;
      p.first_seen_us = now_us;
      p.frags.resize(msg.header.frag_count);
      it = partials_.emplace(key, std::move(p)).first;
    } else if (it->second.frag_count != msg.header.frag_count) {
      throw ReassemblyError("reassemble: conflicting frag_count for txn " +
                            std::to_string(msg.header.txn_id));
    }

    Partial& p = it->second;
    auto& slot = p.frags[msg.header.frag_seq];
    if (slot.has_value()) return std::nullopt;  // duplicate fragment
    slot = msg.ops;
    if (++p.have < p.frag_count) return std::nullopt;

    Assembled out{msg.header.txn_id, p.status, p.from_switch, p.msg_type, {}};
    for (auto& f : p.frags) {
      out.ops.insert(out.ops.end(), f->begin(), f->end());
    }
    partials_.erase(it);
    return out;
  }

  // Drops partial transactions whose first fragment is older than the timeout.
  void sweep(std::uint64_t now_us) {
    for (auto it = partials_.begin(); it != partials_.end();) {
      if (now_us - it->second.first_seen_us > timeout_us_)
        it = partials_.erase(it);
      else
        ++it;
    }
  }

  std::size_t pending() const { return partials_.size(); }
  std::uint64_t timeout_us() const { return timeout_us_; }

 private:
  struct Partial {
    std::uint8_t frag_count = 0;
    TxnStatus status = TxnStatus::Ok;
    bool from_switch = false;
    MsgType msg_type = MsgType::Request;
    std::uint64_t first_seen_us = 0;
    std::uint8_t have = 0;
    std::vector<std::optional<std::vector<Operation>>> frags;
  };

  std::uint64_t timeout_us_;
  std::map<std::pair<std::uint64_t, std::uint32_t>, Partial> partials_;
};

// Store-side request path: feed fragments, get the whole transaction once.
inline std::optional<TransactionSet> reassemble(Reassembler& buf, std::uint64_t sender,
                                                const Message& msg, std::uint64_t now_us) {
  auto assembled = buf.add(sender, msg, now_us);
  if (!assembled) return std::nullopt;
  return ops_to_set(assembled->ops);
}

}  // namespace gotthard
