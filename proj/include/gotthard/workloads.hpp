// Workload generation: Zipf-skewed counter microbenchmarks and a scaled-down
// TPC-C (1 warehouse, 2 districts, 10 customers per district, 50 items)
// restated over exact-key lookups on 128-byte records.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gotthard/client.hpp"
#include "gotthard/netsim.hpp"
#include "gotthard/value.hpp"

namespace gotthard {

// Deterministic draws independent of the standard library's distribution
// implementations (those are unspecified and vary across toolchains).
namespace rnd {

inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

inline std::uint32_t between(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  return lo + static_cast<std::uint32_t>(below(rng, hi - lo + 1ull));
}

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rnd

// ---------------------------------------------------------------------------
// Zipf-distributed rank sampler: P(rank r) proportional to r^-s over ranks
// 1..n. s = 0 degenerates to uniform. Sampling walks a precomputed CDF.
class ZipfSampler {
 public:
  ZipfSampler(double s, std::uint32_t n) : s_(s) {
    if (n == 0) throw std::invalid_argument("ZipfSampler: empty rank space");
    cdf_.reserve(n);
    double total = 0.0;
    for (std::uint32_t r = 1; r <= n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r), s);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }

  std::uint32_t sample_rank(std::mt19937_64& rng) const {
    double u = rnd::unit(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint32_t>(it - cdf_.begin()) + 1;
  }

  double pmf(std::uint32_t rank) const {
    if (rank < 1 || rank > cdf_.size()) return 0.0;
    double lo = rank == 1 ? 0.0 : cdf_[rank - 2];
    return cdf_[rank - 1] - lo;
  }

  std::uint32_t ranks() const { return static_cast<std::uint32_t>(cdf_.size()); }
  double skew() const { return s_; }

 private:
  double s_;
  std::vector<double> cdf_;
};

// ---------------------------------------------------------------------------
// Counter microbenchmark: each transaction either increments or reads one
// key drawn from a Zipf distribution over a small key set.

struct MicroConfig {
  std::uint32_t num_keys = 10;
  double write_fraction = 0.2;
  double zipf = 0.0;
  std::uint64_t seed = 1;
};

inline std::vector<std::pair<std::uint32_t, Value128>> micro_population(std::uint32_t num_keys) {
  std::vector<std::pair<std::uint32_t, Value128>> pop;
  for (std::uint32_t k = 0; k < num_keys; ++k) pop.emplace_back(k, Value128::of_counter(0));
  return pop;
}

class MicroSource : public ProgramSource {
 public:
  MicroSource(const MicroConfig& cfg, std::uint32_t client_id)
      : rng_(cfg.seed ^ client_id), write_fraction_(cfg.write_fraction),
        sampler_(cfg.zipf, cfg.num_keys) {}

  LabeledProgram next() override {
    std::uint32_t key = sampler_.sample_rank(rng_) - 1;  // rank 1 = key 0, hottest
    bool write = rnd::unit(rng_) < write_fraction_;
    return write ? increment_program(key) : remote_read_program(key);
  }

 private:
  std::mt19937_64 rng_;
  double write_fraction_;
  ZipfSampler sampler_;
};

// Locality variant: clients sit in two groups with disjoint key ranges. A
// configurable fraction of each group works on its own range; the rest draw
// from the other group's range, so their traffic misses the local edge cache.
struct LocalityConfig {
  std::uint32_t group_size = 8;
  std::uint32_t keys_per_group = 5;
  double locality = 1.0;  // fraction of each group's clients staying local
  double zipf = 3.0;
  double write_fraction = 0.2;
  std::uint64_t seed = 1;

  std::uint32_t remote_clients_per_group() const {
    return static_cast<std::uint32_t>((1.0 - locality) * group_size + 0.5);
  }
};

class LocalityMicroSource : public ProgramSource {
 public:
  LocalityMicroSource(const LocalityConfig& cfg, std::uint32_t client_id)
      : rng_(cfg.seed ^ client_id), write_fraction_(cfg.write_fraction),
        sampler_(cfg.zipf, cfg.keys_per_group) {
    std::uint32_t group = client_id / cfg.group_size;
    std::uint32_t position = client_id % cfg.group_size;
    bool remote = position < cfg.remote_clients_per_group();
    std::uint32_t target_group = remote ? 1 - group : group;
    key_base_ = target_group * cfg.keys_per_group;
  }

  LabeledProgram next() override {
    std::uint32_t key = key_base_ + sampler_.sample_rank(rng_) - 1;
    bool write = rnd::unit(rng_) < write_fraction_;
    return write ? increment_program(key) : remote_read_program(key);
  }

 private:
  std::mt19937_64 rng_;
  double write_fraction_;
  ZipfSampler sampler_;
  std::uint32_t key_base_ = 0;
};

// ---------------------------------------------------------------------------
// TPC-C lite. Records live in fixed-layout 128-byte values; every access is
// an exact-key lookup through a collision-free packing of (table, primary
// key) into the 32-bit key space.

struct TpccConfig {
  std::uint32_t warehouses = 1;
  std::uint32_t districts = 2;   // per warehouse
  std::uint32_t customers = 10;  // per district
  std::uint32_t items = 50;
  std::uint32_t initial_orders = 10;  // per district, one per customer
  std::uint64_t seed = 1;
  // percent mix: NewOrder, Payment, OrderStatus, Delivery, StockLevel
  std::array<std::uint32_t, 5> mix = {45, 43, 4, 4, 4};
};

namespace tpcc {

enum class Table : std::uint32_t {
  Warehouse = 1,
  District = 2,
  Customer = 3,
  Item = 4,
  Stock = 5,
  Order = 6,
  OrderLine = 7,
  LastOrder = 8,     // per-customer pointer to their latest order id
  DeliveryPtr = 9,   // per-district pointer to the next undelivered order id
};

namespace detail {

inline std::uint32_t tag(Table t) { return static_cast<std::uint32_t>(t) << 28; }

inline void bound(std::uint32_t v, std::uint32_t max, const char* what) {
  if (v > max) throw std::out_of_range(std::string("tpcc key: ") + what + " out of range");
}

}  // namespace detail

inline std::uint32_t warehouse_key(std::uint32_t w) {
  detail::bound(w, 0xff, "warehouse");
  return detail::tag(Table::Warehouse) | w;
}

inline std::uint32_t district_key(std::uint32_t w, std::uint32_t d) {
  detail::bound(w, 0xff, "warehouse");
  detail::bound(d, 0xff, "district");
  return detail::tag(Table::District) | w << 8 | d;
}

inline std::uint32_t customer_key(std::uint32_t w, std::uint32_t d, std::uint32_t c) {
  detail::bound(w, 0xff, "warehouse");
  detail::bound(d, 0xff, "district");
  detail::bound(c, 0xff, "customer");
  return detail::tag(Table::Customer) | w << 16 | d << 8 | c;
}

inline std::uint32_t item_key(std::uint32_t i) {
  detail::bound(i, 0xffff, "item");
  return detail::tag(Table::Item) | i;
}

inline std::uint32_t stock_key(std::uint32_t w, std::uint32_t i) {
  detail::bound(w, 0xff, "warehouse");
  detail::bound(i, 0xffff, "item");
  return detail::tag(Table::Stock) | w << 16 | i;
}

inline std::uint32_t order_key(std::uint32_t w, std::uint32_t d, std::uint32_t o) {
  detail::bound(w, 0x3, "warehouse");
  detail::bound(d, 0x3, "district");
  detail::bound(o, 0xfffff, "order");
  return detail::tag(Table::Order) | w << 22 | d << 20 | o;
}

inline std::uint32_t order_line_key(std::uint32_t w, std::uint32_t d, std::uint32_t o,
                                    std::uint32_t ol) {
  detail::bound(w, 0x3, "warehouse");
  detail::bound(d, 0x3, "district");
  detail::bound(o, 0xfffff, "order");
  detail::bound(ol, 0xf, "order line");
  return detail::tag(Table::OrderLine) | w << 26 | d << 24 | o << 4 | ol;
}

inline std::uint32_t last_order_key(std::uint32_t w, std::uint32_t d, std::uint32_t c) {
  detail::bound(w, 0xff, "warehouse");
  detail::bound(d, 0xff, "district");
  detail::bound(c, 0xff, "customer");
  return detail::tag(Table::LastOrder) | w << 16 | d << 8 | c;
}

inline std::uint32_t delivery_ptr_key(std::uint32_t w, std::uint32_t d) {
  detail::bound(w, 0xff, "warehouse");
  detail::bound(d, 0xff, "district");
  return detail::tag(Table::DeliveryPtr) | w << 8 | d;
}

// --- record layouts -------------------------------------------------------

namespace detail {

inline void put_name(Value128& v, std::size_t off, std::size_t width, const std::string& s) {
  for (std::size_t i = 0; i < width && i < s.size(); ++i)
    v.bytes[off + i] = static_cast<std::uint8_t>(s[i]);
}

inline std::string get_name(const Value128& v, std::size_t off, std::size_t width) {
  std::string s;
  for (std::size_t i = 0; i < width && v.bytes[off + i] != 0; ++i)
    s.push_back(static_cast<char>(v.bytes[off + i]));
  return s;
}

}  // namespace detail

struct WarehouseRec {
  std::string name;         // [0,10)
  std::uint32_t tax_bp = 0;  // [10,14) basis points
  std::uint64_t ytd = 0;     // [14,22) cents

  Value128 to_value() const {
    Value128 v;
    detail::put_name(v, 0, 10, name);
    gotthard::detail::put_u32_be(v.bytes.data() + 10, tax_bp);
    gotthard::detail::put_u64_be(v.bytes.data() + 14, ytd);
    return v;
  }
  static WarehouseRec from_value(const Value128& v) {
    return {detail::get_name(v, 0, 10), gotthard::detail::get_u32_be(v.bytes.data() + 10),
            gotthard::detail::get_u64_be(v.bytes.data() + 14)};
  }
};

struct DistrictRec {
  std::string name;            // [0,10)
  std::uint32_t tax_bp = 0;    // [10,14)
  std::uint64_t ytd = 0;       // [14,22)
  std::uint32_t next_o_id = 0;  // [22,26)

  Value128 to_value() const {
    Value128 v;
    detail::put_name(v, 0, 10, name);
    gotthard::detail::put_u32_be(v.bytes.data() + 10, tax_bp);
    gotthard::detail::put_u64_be(v.bytes.data() + 14, ytd);
    gotthard::detail::put_u32_be(v.bytes.data() + 22, next_o_id);
    return v;
  }
  static DistrictRec from_value(const Value128& v) {
    return {detail::get_name(v, 0, 10), gotthard::detail::get_u32_be(v.bytes.data() + 10),
            gotthard::detail::get_u64_be(v.bytes.data() + 14),
            gotthard::detail::get_u32_be(v.bytes.data() + 22)};
  }
};

struct CustomerRec {
  std::string last;               // [0,16)
  std::string first;              // [16,32)
  std::int64_t balance = 0;        // [32,40) cents, two's complement
  std::uint64_t ytd_payment = 0;   // [40,48)
  std::uint32_t payment_cnt = 0;   // [48,52)
  std::uint32_t delivery_cnt = 0;  // [52,56)

  Value128 to_value() const {
    Value128 v;
    detail::put_name(v, 0, 16, last);
    detail::put_name(v, 16, 16, first);
    gotthard::detail::put_u64_be(v.bytes.data() + 32, static_cast<std::uint64_t>(balance));
    gotthard::detail::put_u64_be(v.bytes.data() + 40, ytd_payment);
    gotthard::detail::put_u32_be(v.bytes.data() + 48, payment_cnt);
    gotthard::detail::put_u32_be(v.bytes.data() + 52, delivery_cnt);
    return v;
  }
  static CustomerRec from_value(const Value128& v) {
    return {detail::get_name(v, 0, 16),
            detail::get_name(v, 16, 16),
            static_cast<std::int64_t>(gotthard::detail::get_u64_be(v.bytes.data() + 32)),
            gotthard::detail::get_u64_be(v.bytes.data() + 40),
            gotthard::detail::get_u32_be(v.bytes.data() + 48),
            gotthard::detail::get_u32_be(v.bytes.data() + 52)};
  }
};

struct ItemRec {
  std::string name;        // [0,24)
  std::uint32_t price = 0;  // [24,28) cents

  Value128 to_value() const {
    Value128 v;
    detail::put_name(v, 0, 24, name);
    gotthard::detail::put_u32_be(v.bytes.data() + 24, price);
    return v;
  }
  static ItemRec from_value(const Value128& v) {
    return {detail::get_name(v, 0, 24), gotthard::detail::get_u32_be(v.bytes.data() + 24)};
  }
};

struct StockRec {
  std::uint32_t quantity = 0;    // [0,4)
  std::uint32_t ytd = 0;         // [4,8)
  std::uint32_t order_cnt = 0;   // [8,12)
  std::uint32_t remote_cnt = 0;  // [12,16)

  Value128 to_value() const {
    Value128 v;
    gotthard::detail::put_u32_be(v.bytes.data() + 0, quantity);
    gotthard::detail::put_u32_be(v.bytes.data() + 4, ytd);
    gotthard::detail::put_u32_be(v.bytes.data() + 8, order_cnt);
    gotthard::detail::put_u32_be(v.bytes.data() + 12, remote_cnt);
    return v;
  }
  static StockRec from_value(const Value128& v) {
    return {gotthard::detail::get_u32_be(v.bytes.data() + 0),
            gotthard::detail::get_u32_be(v.bytes.data() + 4),
            gotthard::detail::get_u32_be(v.bytes.data() + 8),
            gotthard::detail::get_u32_be(v.bytes.data() + 12)};
  }
};

struct OrderRec {
  std::uint32_t c_id = 0;      // [0,4)
  std::uint64_t entry_ts = 0;  // [4,12)
  std::uint32_t carrier = 0;   // [12,16) 0 = undelivered
  std::uint32_t ol_cnt = 0;    // [16,20)

  Value128 to_value() const {
    Value128 v;
    gotthard::detail::put_u32_be(v.bytes.data() + 0, c_id);
    gotthard::detail::put_u64_be(v.bytes.data() + 4, entry_ts);
    gotthard::detail::put_u32_be(v.bytes.data() + 12, carrier);
    gotthard::detail::put_u32_be(v.bytes.data() + 16, ol_cnt);
    return v;
  }
  static OrderRec from_value(const Value128& v) {
    return {gotthard::detail::get_u32_be(v.bytes.data() + 0),
            gotthard::detail::get_u64_be(v.bytes.data() + 4),
            gotthard::detail::get_u32_be(v.bytes.data() + 12),
            gotthard::detail::get_u32_be(v.bytes.data() + 16)};
  }
};

struct OrderLineRec {
  std::uint32_t i_id = 0;         // [0,4)
  std::uint32_t qty = 0;          // [4,8)
  std::uint64_t amount = 0;       // [8,16) cents
  std::uint64_t delivery_ts = 0;  // [16,24) 0 = undelivered

  Value128 to_value() const {
    Value128 v;
    gotthard::detail::put_u32_be(v.bytes.data() + 0, i_id);
    gotthard::detail::put_u32_be(v.bytes.data() + 4, qty);
    gotthard::detail::put_u64_be(v.bytes.data() + 8, amount);
    gotthard::detail::put_u64_be(v.bytes.data() + 16, delivery_ts);
    return v;
  }
  static OrderLineRec from_value(const Value128& v) {
    return {gotthard::detail::get_u32_be(v.bytes.data() + 0),
            gotthard::detail::get_u32_be(v.bytes.data() + 4),
            gotthard::detail::get_u64_be(v.bytes.data() + 8),
            gotthard::detail::get_u64_be(v.bytes.data() + 16)};
  }
};

struct LastOrderRec {
  std::uint32_t o_id = 0;  // [0,4) 0 = none

  Value128 to_value() const {
    Value128 v;
    gotthard::detail::put_u32_be(v.bytes.data(), o_id);
    return v;
  }
  static LastOrderRec from_value(const Value128& v) {
    return {gotthard::detail::get_u32_be(v.bytes.data())};
  }
};

struct DeliveryPtrRec {
  std::uint32_t next_o_id = 0;  // [0,4)

  Value128 to_value() const {
    Value128 v;
    gotthard::detail::put_u32_be(v.bytes.data(), next_o_id);
    return v;
  }
  static DeliveryPtrRec from_value(const Value128& v) {
    return {gotthard::detail::get_u32_be(v.bytes.data())};
  }
};

// Classic TPC-C customer surnames: three syllables indexed by digits.
inline std::string customer_last_name(std::uint32_t n) {
  static const char* syl[] = {"BAR",  "OUGHT", "ABLE", "PRI",   "PRES",
                              "ESE",  "ANTI",  "CALLY", "ATION", "EING"};
  return std::string(syl[n / 100 % 10]) + syl[n / 10 % 10] + syl[n % 10];
}

}  // namespace tpcc

// Deterministic initial database. Districts start with one delivered-or-not
// order per customer so order status and delivery have work immediately.
inline std::vector<std::pair<std::uint32_t, Value128>> tpcc_load(const TpccConfig& cfg) {
  using namespace tpcc;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::pair<std::uint32_t, Value128>> pop;

  for (std::uint32_t w = 1; w <= cfg.warehouses; ++w) {
    WarehouseRec wr{"WARE" + std::to_string(w), rnd::between(rng, 0, 2000), 30'000'000};
    pop.emplace_back(warehouse_key(w), wr.to_value());

    for (std::uint32_t i = 1; i <= cfg.items; ++i) {
      if (w == 1) {
        ItemRec ir{"ITEM" + std::to_string(i), rnd::between(rng, 100, 10'000)};
        pop.emplace_back(item_key(i), ir.to_value());
      }
      StockRec sr{rnd::between(rng, 10, 100), 0, 0, 0};
      pop.emplace_back(stock_key(w, i), sr.to_value());
    }

    for (std::uint32_t d = 1; d <= cfg.districts; ++d) {
      DistrictRec dr{"DIST" + std::to_string(d), rnd::between(rng, 0, 2000), 3'000'000,
                     cfg.initial_orders + 1};
      pop.emplace_back(district_key(w, d), dr.to_value());

      std::uint32_t delivered = cfg.initial_orders * 7 / 10;
      pop.emplace_back(delivery_ptr_key(w, d), DeliveryPtrRec{delivered + 1}.to_value());

      for (std::uint32_t c = 1; c <= cfg.customers; ++c) {
        CustomerRec cr{customer_last_name(c - 1), "FNAME" + std::to_string(c), -1000, 1000, 1, 0};
        pop.emplace_back(customer_key(w, d, c), cr.to_value());
      }

      std::vector<std::uint32_t> latest(cfg.customers + 1, 0);
      for (std::uint32_t o = 1; o <= cfg.initial_orders; ++o) {
        std::uint32_t c = (o - 1) % cfg.customers + 1;  // one initial order per customer
        latest[c] = o;
        bool is_delivered = o <= delivered;
        std::uint32_t ol_cnt = rnd::between(rng, 5, 15);
        OrderRec orec{c, 0, is_delivered ? rnd::between(rng, 1, 10) : 0, ol_cnt};
        pop.emplace_back(order_key(w, d, o), orec.to_value());
        for (std::uint32_t ol = 1; ol <= ol_cnt; ++ol) {
          OrderLineRec line{rnd::between(rng, 1, cfg.items), rnd::between(rng, 1, 10), 0,
                            is_delivered ? 1u : 0u};
          line.amount = static_cast<std::uint64_t>(line.qty) * rnd::between(rng, 100, 10'000);
          pop.emplace_back(order_line_key(w, d, o, ol), line.to_value());
        }
      }
      for (std::uint32_t c = 1; c <= cfg.customers; ++c)
        pop.emplace_back(last_order_key(w, d, c), LastOrderRec{latest[c]}.to_value());
    }
  }
  return pop;
}

// --- transaction programs --------------------------------------------------
// Inputs are drawn once at creation; aborts re-run the same program so the
// transaction's intent is stable across retries.

inline LabeledProgram payment_program(std::uint32_t w, std::uint32_t d, std::uint32_t c,
                                      std::uint32_t amount) {
  using namespace tpcc;
  return {[=](TxnContext& ctx) {
            auto wkey = warehouse_key(w);
            WarehouseRec wr = WarehouseRec::from_value(ctx.read(wkey));
            wr.ytd += amount;
            ctx.write(wkey, wr.to_value());

            auto dkey = district_key(w, d);
            DistrictRec dr = DistrictRec::from_value(ctx.read(dkey));
            dr.ytd += amount;
            ctx.write(dkey, dr.to_value());

            auto ckey = customer_key(w, d, c);
            CustomerRec cr = CustomerRec::from_value(ctx.read(ckey));
            cr.balance -= amount;
            cr.ytd_payment += amount;
            cr.payment_cnt += 1;
            ctx.write(ckey, cr.to_value());
          },
          TxnKind::Payment};
}

inline LabeledProgram order_status_program(std::uint32_t w, std::uint32_t d, std::uint32_t c) {
  using namespace tpcc;
  return {[=](TxnContext& ctx) {
            CustomerRec cr = CustomerRec::from_value(ctx.read(customer_key(w, d, c)));
            (void)cr;
            LastOrderRec lo = LastOrderRec::from_value(ctx.read(last_order_key(w, d, c)));
            if (lo.o_id == 0) return;  // no order yet (or placeholder)
            OrderRec orec = OrderRec::from_value(ctx.read(order_key(w, d, lo.o_id)));
            for (std::uint32_t ol = 1; ol <= orec.ol_cnt && ol <= 15; ++ol)
              ctx.read(order_line_key(w, d, lo.o_id, ol));
          },
          TxnKind::OrderStatus};
}

inline LabeledProgram new_order_program(std::uint32_t w, std::uint32_t d, std::uint32_t c,
                                        std::vector<std::pair<std::uint32_t, std::uint32_t>>
                                            lines /* (item, qty), items distinct */) {
  using namespace tpcc;
  return {[=](TxnContext& ctx) {
            WarehouseRec wr = WarehouseRec::from_value(ctx.read(warehouse_key(w)));
            (void)wr.tax_bp;
            auto dkey = district_key(w, d);
            DistrictRec dr = DistrictRec::from_value(ctx.read(dkey));
            ctx.read(customer_key(w, d, c));
            std::uint32_t o = dr.next_o_id;
            if (o == 0 || o > 0xfffff) return;  // placeholder district record
            dr.next_o_id = o + 1;
            ctx.write(dkey, dr.to_value());

            for (std::size_t idx = 0; idx < lines.size(); ++idx) {
              auto [item, qty] = lines[idx];
              ItemRec ir = ItemRec::from_value(ctx.read(item_key(item)));
              auto skey = stock_key(w, item);
              StockRec sr = StockRec::from_value(ctx.read(skey));
              sr.quantity = sr.quantity >= qty + 10 ? sr.quantity - qty
                                                    : sr.quantity + 91 - qty;
              sr.ytd += qty;
              sr.order_cnt += 1;
              ctx.write(skey, sr.to_value());

              OrderLineRec line{item, qty, static_cast<std::uint64_t>(ir.price) * qty, 0};
              ctx.write(order_line_key(w, d, o, static_cast<std::uint32_t>(idx) + 1),
                        line.to_value());
            }

            OrderRec orec{c, 0, 0, static_cast<std::uint32_t>(lines.size())};
            ctx.write(order_key(w, d, o), orec.to_value());
            ctx.write(last_order_key(w, d, c), LastOrderRec{o}.to_value());
          },
          TxnKind::NewOrder};
}

inline LabeledProgram delivery_program(std::uint32_t w, std::uint32_t districts,
                                       std::uint32_t carrier) {
  using namespace tpcc;
  return {[=](TxnContext& ctx) {
            for (std::uint32_t d = 1; d <= districts; ++d) {
              auto pkey = delivery_ptr_key(w, d);
              DeliveryPtrRec dp = DeliveryPtrRec::from_value(ctx.read(pkey));
              DistrictRec dr = DistrictRec::from_value(ctx.read(district_key(w, d)));
              if (dp.next_o_id == 0) continue;             // placeholder
              if (dp.next_o_id >= dr.next_o_id) continue;  // nothing undelivered
              std::uint32_t o = dp.next_o_id;

              auto okey = order_key(w, d, o);
              OrderRec orec = OrderRec::from_value(ctx.read(okey));
              if (orec.c_id == 0) continue;  // placeholder order record

              std::uint64_t total = 0;
              for (std::uint32_t ol = 1; ol <= orec.ol_cnt && ol <= 15; ++ol) {
                auto lkey = order_line_key(w, d, o, ol);
                OrderLineRec line = OrderLineRec::from_value(ctx.read(lkey));
                total += line.amount;
                line.delivery_ts = 1;
                ctx.write(lkey, line.to_value());
              }

              orec.carrier = carrier;
              ctx.write(okey, orec.to_value());

              auto ckey = customer_key(w, d, orec.c_id);
              CustomerRec cr = CustomerRec::from_value(ctx.read(ckey));
              cr.balance += static_cast<std::int64_t>(total);
              cr.delivery_cnt += 1;
              ctx.write(ckey, cr.to_value());

              ctx.write(pkey, DeliveryPtrRec{o + 1}.to_value());
            }
          },
          TxnKind::Delivery};
}

inline LabeledProgram stock_level_program(std::uint32_t w, std::uint32_t d,
                                          std::uint32_t threshold) {
  using namespace tpcc;
  return {[=](TxnContext& ctx) {
            DistrictRec dr = DistrictRec::from_value(ctx.read(district_key(w, d)));
            if (dr.next_o_id <= 1 || dr.next_o_id > 0xfffff) return;
            std::uint32_t last = dr.next_o_id - 1;
            std::uint32_t first = last > 4 ? last - 4 : 1;
            std::uint32_t low = 0;
            for (std::uint32_t o = first; o <= last; ++o) {
              OrderRec orec = OrderRec::from_value(ctx.read(order_key(w, d, o)));
              for (std::uint32_t ol = 1; ol <= orec.ol_cnt && ol <= 15; ++ol) {
                OrderLineRec line =
                    OrderLineRec::from_value(ctx.read(order_line_key(w, d, o, ol)));
                if (line.i_id == 0) continue;
                StockRec sr = StockRec::from_value(ctx.read(stock_key(w, line.i_id)));
                if (sr.quantity < threshold) ++low;
              }
            }
            (void)low;  // report-only transaction: the count is the result
          },
          TxnKind::StockLevel};
}

class TpccSource : public ProgramSource {
 public:
  TpccSource(const TpccConfig& cfg, std::uint32_t client_id)
      : cfg_(cfg), rng_(cfg.seed ^ client_id) {
    std::uint32_t sum = 0;
    for (auto m : cfg_.mix) sum += m;
    if (sum != 100) throw std::invalid_argument("TpccSource: mix must total 100");
  }

  LabeledProgram next() override {
    std::uint32_t w = rnd::between(rng_, 1, cfg_.warehouses);
    std::uint32_t d = rnd::between(rng_, 1, cfg_.districts);
    std::uint32_t c = rnd::between(rng_, 1, cfg_.customers);
    std::uint32_t roll = static_cast<std::uint32_t>(rnd::below(rng_, 100));
    std::uint32_t acc = 0;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < cfg_.mix.size(); ++i) {
      acc += cfg_.mix[i];
      if (roll < acc) {
        pick = i;
        break;
      }
    }
    switch (pick) {
      case 0: return new_order_program(w, d, c, draw_lines());
      case 1: return payment_program(w, d, c, rnd::between(rng_, 100, 500'000));
      case 2: return order_status_program(w, d, c);
      case 3: return delivery_program(w, cfg_.districts, rnd::between(rng_, 1, 10));
      default: return stock_level_program(w, d, rnd::between(rng_, 10, 20));
    }
  }

 private:
  // 5..15 distinct items via a partial Fisher-Yates over the item range
  std::vector<std::pair<std::uint32_t, std::uint32_t>> draw_lines() {
    std::uint32_t n = rnd::between(rng_, 5, 15);
    std::vector<std::uint32_t> ids(cfg_.items);
    for (std::uint32_t i = 0; i < cfg_.items; ++i) ids[i] = i + 1;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> lines;
    for (std::uint32_t i = 0; i < n && i < cfg_.items; ++i) {
      std::uint32_t j = i + static_cast<std::uint32_t>(rnd::below(rng_, cfg_.items - i));
      std::swap(ids[i], ids[j]);
      lines.emplace_back(ids[i], rnd::between(rng_, 1, 10));
    }
    return lines;
  }

  TpccConfig cfg_;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Population files: one "key,hex_value" line per record, trailing zero bytes
// of the value trimmed to keep files small.

inline void write_population_csv(const std::string& path,
                                 const std::vector<std::pair<std::uint32_t, Value128>>& pop) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write population file: " + path);
  out << "key,value_hex\n";
  for (const auto& [k, v] : pop) {
    std::string hex = to_hex(v);
    std::size_t keep = hex.size();
    while (keep > 2 && hex[keep - 1] == '0' && hex[keep - 2] == '0') keep -= 2;
    out << k << "," << hex.substr(0, keep) << "\n";
  }
}

inline std::vector<std::pair<std::uint32_t, Value128>> read_population_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read population file: " + path);
  std::vector<std::pair<std::uint32_t, Value128>> pop;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("malformed population line: " + line);
    std::uint32_t key = static_cast<std::uint32_t>(std::stoul(line.substr(0, comma)));
    pop.emplace_back(key, value_from_hex(line.substr(comma + 1)));
  }
  return pop;
}

}  // namespace gotthard
