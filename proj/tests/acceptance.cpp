// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failed criteria. Experiment CSVs are written
// to acceptance_artifacts/ in the working directory, and criteria 4-10 are
// executed twice so criterion 11 can compare the emitted tables byte-for-byte.
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gotthard/bench.hpp"

using namespace gotthard;

namespace {

struct CritResult {
  int id = 0;
  std::string name;
  bool pass = true;
  std::string detail;
  // name -> content; written to acceptance_artifacts/ and byte-compared by
  // the determinism criterion.
  std::vector<std::pair<std::string, std::string>> artifacts;

  CritResult(int i, std::string n) : id(i), name(std::move(n)) {}
};

std::string fmtf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

CsvTable to_table(const std::string& csv) {
  std::istringstream in(csv);
  return load_csv(in);
}

std::string to_csv(const std::vector<MetricsRecord>& recs) {
  std::ostringstream os;
  emit_csv(recs, os);
  return os.str();
}

std::string to_csv(const std::vector<MotivationRecord>& recs) {
  std::ostringstream os;
  emit_motivation_csv(recs, os);
  return os.str();
}

// Applies the trend script to the CSV; appends failure text and clears `pass`.
void apply_checks(const std::string& csv, const std::string& script, bool& pass,
                  std::vector<std::string>& notes) {
  auto failures = check_trends(to_table(csv), script);
  if (!failures.empty()) {
    pass = false;
    for (auto& f : failures) notes.push_back(f);
  }
}

double metric_at(const std::vector<MetricsRecord>& rows, SwitchMode m, double sweep_value,
                 double MetricsRecord::* field) {
  for (const auto& r : rows)
    if (r.mode == to_string(m) && std::abs(r.sweep_value - sweep_value) < 1e-9) return r.*field;
  throw std::runtime_error("no row for mode/sweep value");
}

// ---------------------------------------------------------------------------
// Criterion 1: codec and reassembly fidelity.

Value128 random_value(std::mt19937_64& rng) {
  Value128 v;
  for (auto& b : v.bytes) b = static_cast<std::uint8_t>(rng());
  return v;
}

Message random_message(std::mt19937_64& rng) {
  Message m;
  m.header.msg_type = (rng() & 1) ? MsgType::Response : MsgType::Request;
  m.header.from_switch = (rng() & 1) != 0;
  m.header.txn_id = static_cast<std::uint32_t>(rng());
  m.header.frag_count = static_cast<std::uint8_t>(1 + rng() % 255);
  m.header.frag_seq = static_cast<std::uint8_t>(rng() % m.header.frag_count);
  m.header.status = (m.header.msg_type == MsgType::Response && (rng() & 1)) ? TxnStatus::Abort
                                                                            : TxnStatus::Ok;
  std::size_t n = rng() % (kMaxOpsPerFragment + 1);
  for (std::size_t i = 0; i < n; ++i)
    m.ops.push_back({static_cast<OpType>(1 + rng() % 3), static_cast<std::uint32_t>(rng()),
                     random_value(rng)});
  m.header.op_cnt = static_cast<std::uint8_t>(n);
  return m;
}

TransactionSet random_set(std::mt19937_64& rng, bool force_max) {
  std::size_t nc = force_max ? 20 : rng() % 21;
  std::size_t nr = force_max ? 40 : rng() % 41;
  std::size_t nw = force_max ? 40 : rng() % 40;
  TransactionSet s;
  for (std::size_t i = 0; i < nc; ++i)
    s.compares.push_back({static_cast<std::uint32_t>(rng()), random_value(rng)});
  for (std::size_t i = 0; i < nr; ++i) s.reads.push_back(static_cast<std::uint32_t>(rng()));
  for (std::size_t i = 0; i < nw; ++i)
    s.writes.push_back({static_cast<std::uint32_t>(rng()), random_value(rng)});
  return s;
}

CritResult criterion1() {
  CritResult r{1, "wire codec fidelity"};
  std::mt19937_64 rng(0x51);
  const int kMessages = 100000;
  int codec_failures = 0;
  for (int i = 0; i < kMessages; ++i) {
    Message m = random_message(rng);
    auto bytes = encode(m);
    Message d = decode(bytes);
    if (!(d == m) || encode(d) != bytes) ++codec_failures;
  }

  const int kSets = 2000;
  int reasm_failures = 0;
  Reassembler reasm;
  for (int i = 0; i < kSets; ++i) {
    TransactionSet set = random_set(rng, i % 10 == 0);
    std::uint32_t txn_id = static_cast<std::uint32_t>(i + 1);
    auto frags = fragment_request(txn_id, set);
    for (const auto& f : frags)
      if (encode(f).size() > kMaxFragmentBytes) ++reasm_failures;

    std::vector<Message> arrivals = frags;
    if (frags.size() > 1) {
      // Duplicates are kept below frag_count so a stray post-completion copy
      // can never re-assemble into a second full transaction.
      std::size_t ndups = frags.size() == 2 ? 1 : 1 + rng() % 2;
      for (std::size_t d = 0; d < ndups; ++d) arrivals.push_back(frags[rng() % frags.size()]);
    }
    std::shuffle(arrivals.begin(), arrivals.end(), rng);

    int assembled = 0;
    TransactionSet got;
    bool meta_ok = true;
    for (const auto& msg : arrivals) {
      auto out = reasm.add(/*sender=*/7, msg, /*now_us=*/static_cast<std::uint64_t>(i) * 10);
      if (!out) continue;
      ++assembled;
      got = ops_to_set(out->ops);
      meta_ok = out->txn_id == txn_id && out->status == TxnStatus::Ok &&
                out->msg_type == MsgType::Request && !out->from_switch;
    }
    if (assembled != 1 || !(got == set) || !meta_ok) ++reasm_failures;
  }
  reasm.sweep(std::uint64_t{1} << 62);
  if (reasm.pending() != 0) ++reasm_failures;

  r.pass = codec_failures == 0 && reasm_failures == 0;
  r.detail = fmtf("%d codec round-trips, %d reassemblies under shuffle+duplication; %d failures",
                  kMessages, kSets, codec_failures + reasm_failures);
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 2: store semantics against an independent reference evaluator.

struct RefStore {
  std::map<std::uint32_t, Value128> state;

  Value128 current(std::uint32_t key) const {
    auto it = state.find(key);
    return it == state.end() ? Value128::zero() : it->second;
  }

  StoreResponse process(const TransactionSet& t) {
    StoreResponse resp;
    for (const auto& c : t.compares)
      if (!(current(c.key) == c.value)) resp.payload.push_back({OpType::Compare, c.key, current(c.key)});
    if (!resp.payload.empty()) {
      resp.status = TxnStatus::Abort;
      return resp;  // no state change on abort
    }
    for (const auto& w : t.writes) state[w.key] = w.value;
    for (const auto& w : t.writes) resp.payload.push_back({OpType::Write, w.key, w.value});
    for (auto k : t.reads) resp.payload.push_back({OpType::Read, k, current(k)});
    return resp;
  }
};

CritResult criterion2() {
  CritResult r{2, "store conformance"};
  std::mt19937_64 rng(0x570);
  Store store;
  RefStore ref;
  const int kCases = 120;
  int mismatches = 0, aborts = 0, commits = 0;

  auto small_value = [&](std::uint32_t limit) {
    if (rng() % 5 == 0) return random_value(rng);
    return Value128::of_counter(static_cast<std::uint32_t>(rng() % limit));
  };

  for (int i = 0; i < kCases; ++i) {
    TransactionSet t;
    std::size_t nc = rng() % 4, nr = rng() % 4, nw = rng() % 4;
    for (std::size_t j = 0; j < nc; ++j) {
      std::uint32_t key = rng() % 8;
      // Bias toward matching compares so both commit and abort paths stay hot.
      Value128 v = (rng() % 100 < 55) ? ref.current(key) : small_value(4);
      t.compares.push_back({key, v});
    }
    for (std::size_t j = 0; j < nr; ++j) t.reads.push_back(rng() % 8);
    for (std::size_t j = 0; j < nw; ++j) t.writes.push_back({static_cast<std::uint32_t>(rng() % 8), small_value(100)});

    auto before = store.snapshot();
    std::size_t log_before = store.commit_log().size();
    StoreResponse got = store.process(static_cast<std::uint32_t>(1000 + i), t);
    StoreResponse want = ref.process(t);

    bool ok = got.status == want.status && got.payload == want.payload;
    if (want.status == TxnStatus::Abort) {
      ++aborts;
      ok = ok && store.snapshot() == before && store.commit_log().size() == log_before;
    } else {
      ++commits;
    }
    if (i % 10 == 9) ok = ok && store.snapshot() == ref.state;
    if (!ok) ++mismatches;
  }

  bool coverage = aborts >= 10 && commits >= 10;
  r.pass = mismatches == 0 && coverage;
  r.detail = fmtf("%d randomized cases vs reference evaluator (%d commits, %d aborts, "
                  "abort purity checked); %d mismatches",
                  kCases, commits, aborts, mismatches);
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 3: switch decision table and forwarding transparency.

Message one_frag_request(std::uint32_t txn_id, const TransactionSet& s) {
  auto frags = fragment_request(txn_id, s);
  if (frags.size() != 1) throw std::logic_error("expected single-fragment request");
  return frags.front();
}

CritResult criterion3() {
  CritResult r{3, "switch branch semantics"};
  std::vector<std::string> bad;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) bad.push_back(what);
  };

  Switch sw(SwitchMode::Gotthard, 64);
  const Value128 v5 = Value128::of_counter(7), v7 = Value128::of_counter(11);
  const Value128 wrong = Value128::of_counter(1), vnew = Value128::of_counter(9);

  // Multi-fragment transactions bypass processing and forward bit-for-bit.
  TransactionSet big;
  for (std::uint32_t k = 0; k < 12; ++k) big.writes.push_back({100 + k, Value128::of_counter(k)});
  for (const auto& f : fragment_request(42, big)) {
    auto act = sw.on_client_request(f);
    expect(act.kind == SwitchAction::Kind::ForwardToStore && encode(act.msg) == encode(f),
           "fragment passthrough forwards unchanged");
  }
  expect(sw.stats().fragmented_passthrough == 2, "fragment passthrough counted");
  expect(sw.cache().size() == 0, "fragment passthrough leaves cache untouched");

  // Compare on an uncached key: forward to the store, adopt nothing.
  {
    TransactionSet t;
    t.compares.push_back({5, v5});
    t.writes.push_back({5, vnew});
    Message m = one_frag_request(43, t);
    auto act = sw.on_client_request(m);
    expect(act.kind == SwitchAction::Kind::ForwardToStore && encode(act.msg) == encode(m),
           "uncached compare forwards unchanged");
    expect(!sw.cache().contains(5), "uncached compare adopts no writes");
  }

  // Abort corrections repair the cache; OK responses do not touch it.
  {
    Message abort_resp = fragment_response(43, TxnStatus::Abort, false, {{OpType::Compare, 5, v5}}).front();
    auto act = sw.on_store_response(abort_resp);
    expect(act.kind == SwitchAction::Kind::ForwardToClient, "store response forwarded to client");
    expect(sw.cache().get(5) == std::optional<Value128>(v5), "abort corrections repair cache");
    Message ok_resp = fragment_response(44, TxnStatus::Ok, false, {{OpType::Write, 6, vnew}}).front();
    sw.on_store_response(ok_resp);
    expect(!sw.cache().contains(6), "ok responses leave optimistic cache alone");
    Message seed7 = fragment_response(46, TxnStatus::Abort, false, {{OpType::Compare, 7, v7}}).front();
    sw.on_store_response(seed7);
  }

  // Cached mismatch: early abort with corrections in operation order.
  {
    TransactionSet t;
    t.compares.push_back({5, wrong});
    t.compares.push_back({7, wrong});
    t.writes.push_back({5, vnew});
    std::uint64_t fwd_before = sw.stats().forwarded_requests;
    auto act = sw.on_client_request(one_frag_request(45, t));
    expect(act.kind == SwitchAction::Kind::RespondToClient, "mismatch answered at switch");
    expect(act.msg.header.msg_type == MsgType::Response &&
               act.msg.header.status == TxnStatus::Abort && act.msg.header.from_switch &&
               act.msg.header.txn_id == 45,
           "early abort marked as switch response");
    std::vector<Operation> corrections{{OpType::Compare, 5, v5}, {OpType::Compare, 7, v7}};
    expect(act.msg.ops == corrections, "corrections carry cached values in op order");
    expect(sw.stats().forwarded_requests == fwd_before, "early abort skips the store");
    expect(!sw.cache().contains(9998) && sw.cache().get(5) == std::optional<Value128>(v5),
           "early abort leaves cache and writes unapplied");
  }

  // Compare-only transaction matching the cache: answered OK at the switch.
  {
    TransactionSet t;
    t.compares.push_back({5, v5});
    t.compares.push_back({7, v7});
    auto act = sw.on_client_request(one_frag_request(47, t));
    expect(act.kind == SwitchAction::Kind::RespondToClient &&
               act.msg.header.status == TxnStatus::Ok && act.msg.header.from_switch &&
               act.msg.ops.empty(),
           "all-match compare-only answered OK with empty payload");
    expect(sw.stats().oks_issued >= 1, "switch OK counted");
  }

  // All compares match and the transaction writes: adopt writes, then forward.
  {
    TransactionSet t;
    t.compares.push_back({5, v5});
    t.reads.push_back(5);
    t.writes.push_back({8, vnew});
    t.writes.push_back({5, vnew});
    Message m = one_frag_request(48, t);
    auto act = sw.on_client_request(m);
    expect(act.kind == SwitchAction::Kind::ForwardToStore && encode(act.msg) == encode(m),
           "write-through still forwards the original bytes");
    expect(sw.cache().get(8) == std::optional<Value128>(vnew) &&
               sw.cache().get(5) == std::optional<Value128>(vnew),
           "write-through adopts writes into the cache");
  }

  // Forwarding transparency across every mode: whatever reaches the store is
  // the client's message, bit for bit.
  {
    std::mt19937_64 rng(0x3);
    std::uint64_t forwards = 0;
    for (SwitchMode mode : {SwitchMode::Forward, SwitchMode::ReadCache, SwitchMode::Gotthard}) {
      Switch s(mode, 32);
      for (int i = 0; i < 700; ++i) {
        TransactionSet t;
        std::size_t nc = rng() % 3, nr = rng() % 3, nw = rng() % 3;
        for (std::size_t j = 0; j < nc; ++j)
          t.compares.push_back({static_cast<std::uint32_t>(rng() % 24), Value128::of_counter(static_cast<std::uint32_t>(rng() % 3))});
        for (std::size_t j = 0; j < nr; ++j) t.reads.push_back(rng() % 24);
        for (std::size_t j = 0; j < nw; ++j)
          t.writes.push_back({static_cast<std::uint32_t>(rng() % 24), Value128::of_counter(static_cast<std::uint32_t>(rng() % 3))});
        if (rng() % 7 == 0)  // occasional multi-fragment transaction
          for (std::uint32_t k = 0; k < 15; ++k) t.writes.push_back({200 + k, Value128::zero()});
        for (const auto& frag : fragment_request(static_cast<std::uint32_t>(i), t)) {
          auto act = s.on_client_request(frag);
          if (act.kind != SwitchAction::Kind::ForwardToStore) continue;
          ++forwards;
          if (encode(act.msg) != encode(frag)) bad.push_back("forwarded bytes differ from input");
        }
        if (rng() % 3 == 0) {  // keep the caches busy from the response side
          std::vector<Operation> payload{{OpType::Compare, static_cast<std::uint32_t>(rng() % 24),
                                          Value128::of_counter(static_cast<std::uint32_t>(rng() % 3))}};
          s.on_store_response(fragment_response(static_cast<std::uint32_t>(i),
                                                rng() % 2 ? TxnStatus::Abort : TxnStatus::Ok,
                                                false, payload).front());
        }
      }
    }
    expect(forwards > 1000, "transparency property exercised forwarding paths");
  }

  r.pass = bad.empty();
  r.detail = bad.empty() ? "decision table and byte-level forwarding transparency verified"
                         : join(bad, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 4: shared-counter serializability across modes and client counts.

RunParams counter_params(SwitchMode mode, std::uint32_t clients, std::uint64_t seed) {
  RunParams p;
  p.workload = "micro";
  p.mode = mode;
  p.num_clients = clients;
  p.num_keys = 1;
  p.write_fraction = 1.0;
  p.zipf = 0.0;
  p.duration_s = 180.0;
  p.warmup_s = 5.0;
  p.seed = seed;
  return p;
}

CritResult criterion4() {
  CritResult r{4, "counter serializability"};
  ExperimentConfig cfg;
  cfg.name = "counter_serializability";
  cfg.modes = {SwitchMode::Forward, SwitchMode::ReadCache, SwitchMode::Gotthard};
  cfg.sweep = "num_clients";
  cfg.values = {1, 2, 4, 8, 16};
  cfg.base = counter_params(SwitchMode::Forward, 8, 1);
  r.artifacts.push_back({"crit04_counter.csv", to_csv(run_experiment(cfg))});

  struct Probe {
    SwitchMode mode;
    std::uint32_t clients;
    std::uint64_t seed;
  };
  std::vector<Probe> probes;
  for (SwitchMode m : cfg.modes)
    for (std::uint32_t c : {1u, 2u, 4u, 8u, 16u}) probes.push_back({m, c, 1});
  for (SwitchMode m : cfg.modes)
    for (std::uint32_t c : {4u, 8u, 16u}) probes.push_back({m, c, 2});
  probes.push_back({SwitchMode::Gotthard, 16, 3});

  int violations = 0;
  std::vector<std::string> notes;
  for (const auto& pr : probes) {
    RunParams p = counter_params(pr.mode, pr.clients, pr.seed);
    auto built = bench_detail::build_system(p);
    built.sys->run_until(static_cast<std::uint64_t>((p.warmup_s + p.duration_s) * 1e6));
    const Store& st = built.sys->store_node().store();
    std::uint64_t increments = 0;
    for (const auto& rec : st.commit_log())
      if (!rec.writes.empty()) ++increments;
    bool counter_ok = st.lookup(0).counter() == increments;
    bool replay_ok = st.snapshot() == replay_log(st.initial_population(), st.commit_log());
    if (!counter_ok || !replay_ok) {
      ++violations;
      notes.push_back(fmtf("%s x%u seed %" PRIu64 ": counter=%u increments=%" PRIu64 " replay=%s",
                           to_string(pr.mode), pr.clients, pr.seed, st.lookup(0).counter(),
                           increments, replay_ok ? "ok" : "MISMATCH"));
    }
  }

  r.pass = violations == 0;
  r.detail = violations == 0
                 ? fmtf("%zu seeded runs: final counter equals committed increments and state "
                        "replays from the commit log",
                        probes.size())
                 : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 5: time to 1000 commits on one contended counter.

CritResult criterion5() {
  CritResult r{5, "early-abort completion time"};
  const std::vector<double> fractions{0.2, 0.25, 0.5, 0.75, 1.0};
  std::vector<MotivationRecord> recs;
  for (SwitchMode m : {SwitchMode::Forward, SwitchMode::ReadCache, SwitchMode::Gotthard})
    for (double w : fractions) {
      RunParams p;
      p.mode = m;
      p.write_fraction = w;
      recs.push_back(motivation_run(p, 1000));
    }
  r.artifacts.push_back({"crit05_completion.csv", to_csv(recs)});

  auto completion = [&](SwitchMode m, double w) -> double {
    for (const auto& rec : recs)
      if (rec.mode == to_string(m) && std::abs(rec.write_fraction - w) < 1e-9)
        return rec.completion_s;
    throw std::runtime_error("missing completion record");
  };

  std::vector<std::string> notes;
  double g_ratio = completion(SwitchMode::Gotthard, 0.25) / completion(SwitchMode::Forward, 0.25);
  if (!(g_ratio <= 0.6)) {
    r.pass = false;
    notes.push_back(fmtf("early-abort completion at 25%% writes is %.3fx forwarding (need <= 0.6)",
                         g_ratio));
  }
  double worst_rc = 0.0;
  for (double w : fractions) {
    double dev = std::abs(completion(SwitchMode::ReadCache, w) / completion(SwitchMode::Forward, w) - 1.0);
    worst_rc = std::max(worst_rc, dev);
  }
  if (!(worst_rc <= 0.10)) {
    r.pass = false;
    notes.push_back(fmtf("read cache deviates %.1f%% from forwarding (need <= 10%%)", worst_rc * 100));
  }
  if (r.pass)
    r.detail = fmtf("1000-commit completion: early aborts at %.3fx forwarding at 25%% writes; "
                    "read cache within %.1f%% of forwarding across fractions >= 0.2",
                    g_ratio, worst_rc * 100);
  else
    r.detail = join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 6: contended read-write mix vs read-only, skewed keys.

CritResult criterion6() {
  CritResult r{6, "contention throughput"};
  ExperimentConfig cfg;
  cfg.name = "contention_zipf2";
  cfg.modes = {SwitchMode::Gotthard, SwitchMode::ReadCache};
  cfg.sweep = "write_fraction";
  cfg.values = {0.0, 0.5};
  cfg.base.zipf = 2.0;
  std::string csv = to_csv(run_experiment(cfg));
  r.artifacts.push_back({"crit06_contention.csv", csv});

  std::vector<std::string> notes;
  apply_checks(csv,
               "ratio_ge committed_txn_per_sec gotthard read_cache 1.5 sweep_value=0.5\n"
               "cmp_ge committed_txn_per_sec read_cache gotthard sweep_value=0\n",
               r.pass, notes);
  r.detail = r.pass ? "early aborts beat the read cache >= 1.5x at 50% writes; read-only favors "
                      "the cache"
                    : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 7: sensitivity to the store's extra write distance.

CritResult criterion7() {
  CritResult r{7, "switch placement sensitivity"};
  ExperimentConfig sweep;
  sweep.name = "delta_sweep";
  sweep.modes = {SwitchMode::Gotthard};
  sweep.sweep = "delta";
  sweep.values = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::string csv_sweep = to_csv(run_experiment(sweep));

  ExperimentConfig point;
  point.name = "delta_point";
  point.modes = {SwitchMode::Gotthard, SwitchMode::Forward};
  point.sweep = "delta";
  point.values = {0.2};
  std::string csv_point = to_csv(run_experiment(point));

  r.artifacts.push_back({"crit07_delta_sweep.csv", csv_sweep});
  r.artifacts.push_back({"crit07_delta_point.csv", csv_point});

  std::vector<std::string> notes;
  apply_checks(csv_sweep,
               "mono_nonincr committed_txn_per_sec gotthard allow_inversions=1 slack=0.05\n"
               "mono_nondecr mean_commit_latency_ms gotthard allow_inversions=1 slack=0.05\n",
               r.pass, notes);
  apply_checks(csv_point, "cmp_lt mean_commit_latency_ms gotthard forward\n", r.pass, notes);
  r.detail = r.pass ? "throughput falls and latency rises as the switch moves toward the store; early aborts "
                      "stay below forwarding latency at delta 0.2"
                    : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 8: benefit grows with key-popularity skew.

CritResult criterion8() {
  CritResult r{8, "skew sensitivity"};
  ExperimentConfig cfg;
  cfg.name = "skew_sweep";
  cfg.modes = {SwitchMode::Gotthard, SwitchMode::ReadCache};
  cfg.sweep = "zipf";
  cfg.values = {0.0, 1.0, 2.0, 3.0};
  cfg.base.write_fraction = 0.2;
  auto rows = run_experiment(cfg);
  r.artifacts.push_back({"crit08_skew.csv", to_csv(rows)});

  std::vector<double> ratios;
  for (double s : cfg.values)
    ratios.push_back(metric_at(rows, SwitchMode::Gotthard, s, &MetricsRecord::committed_txn_per_sec) /
                     metric_at(rows, SwitchMode::ReadCache, s, &MetricsRecord::committed_txn_per_sec));
  std::vector<std::string> notes;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i] + 1e-12 < ratios[i - 1]) {
      r.pass = false;
      notes.push_back(fmtf("ratio fell from %.4f to %.4f at skew %.0f", ratios[i - 1], ratios[i],
                           cfg.values[i]));
    }
  for (std::size_t i = 0; i < ratios.size(); ++i)
    if (cfg.values[i] >= 2.0 && !(ratios[i] > 1.0)) {
      r.pass = false;
      notes.push_back(fmtf("ratio %.4f not above 1 at skew %.0f", ratios[i], cfg.values[i]));
    }
  r.detail = r.pass ? fmtf("throughput ratio vs read cache rises with skew: %.3f, %.3f, %.3f, %.3f",
                           ratios[0], ratios[1], ratios[2], ratios[3])
                    : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 9: two switch domains with a tunable local-access fraction.

CritResult criterion9() {
  CritResult r{9, "locality placement"};
  ExperimentConfig cfg;
  cfg.name = "locality_sweep";
  cfg.modes = {SwitchMode::Gotthard, SwitchMode::ReadCache, SwitchMode::Forward};
  cfg.sweep = "locality";
  cfg.values = {0.5, 0.625, 0.75, 0.875, 1.0};
  cfg.base.workload = "locality";
  cfg.base.zipf = 3.0;
  cfg.base.warmup_s = 240.0;
  std::string csv = to_csv(run_experiment(cfg));
  r.artifacts.push_back({"crit09_locality.csv", csv});

  std::vector<std::string> notes;
  apply_checks(csv,
               "mono_nondecr committed_txn_per_sec gotthard\n"
               "cmp_ge committed_txn_per_sec gotthard read_cache sweep_value=1.0\n"
               "cmp_ge committed_txn_per_sec gotthard forward sweep_value=1.0\n"
               "cmp_le committed_txn_per_sec gotthard read_cache sweep_value=0.5\n",
               r.pass, notes);
  r.detail = r.pass ? "early-abort gain grows with locality and wins outright at full locality"
                    : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 10: order-entry workload, single-type mixes plus replay probes.

CritResult criterion10() {
  CritResult r{10, "transactional workload"};
  auto mix_run = [&](const char* name, std::array<std::uint32_t, 5> mix) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.modes = {SwitchMode::Gotthard, SwitchMode::ReadCache};
    cfg.sweep = "delta";
    cfg.values = {0.2};
    cfg.base.workload = "tpcc";
    cfg.base.mix = mix;
    cfg.base.warmup_s = 240.0;
    return run_experiment(cfg);
  };
  auto payment = mix_run("payment_only", {0, 100, 0, 0, 0});
  auto orderstatus = mix_run("orderstatus_only", {0, 0, 100, 0, 0});
  r.artifacts.push_back({"crit10_payment.csv", to_csv(payment)});
  r.artifacts.push_back({"crit10_orderstatus.csv", to_csv(orderstatus)});

  std::vector<std::string> notes;
  double pay_ratio = metric_at(payment, SwitchMode::Gotthard, 0.2, &MetricsRecord::committed_txn_per_sec) /
                     metric_at(payment, SwitchMode::ReadCache, 0.2, &MetricsRecord::committed_txn_per_sec);
  double os_ratio = metric_at(orderstatus, SwitchMode::Gotthard, 0.2, &MetricsRecord::committed_txn_per_sec) /
                    metric_at(orderstatus, SwitchMode::ReadCache, 0.2, &MetricsRecord::committed_txn_per_sec);
  if (!(pay_ratio >= 1.3)) {
    r.pass = false;
    notes.push_back(fmtf("write-heavy mix ratio %.3f below 1.3", pay_ratio));
  }
  if (!(os_ratio >= 1.0)) {
    r.pass = false;
    notes.push_back(fmtf("read-only mix ratio %.3f below 1.0", os_ratio));
  }

  struct Probe {
    std::array<std::uint32_t, 5> mix;
    SwitchMode mode;
  };
  std::vector<Probe> probes = {{{0, 100, 0, 0, 0}, SwitchMode::Gotthard},
                               {{0, 0, 100, 0, 0}, SwitchMode::Gotthard},
                               {{45, 43, 4, 4, 4}, SwitchMode::Gotthard},
                               {{45, 43, 4, 4, 4}, SwitchMode::ReadCache},
                               {{45, 43, 4, 4, 4}, SwitchMode::Forward}};
  int replay_failures = 0;
  for (const auto& pr : probes) {
    RunParams p;
    p.workload = "tpcc";
    p.mode = pr.mode;
    p.mix = pr.mix;
    p.duration_s = 60.0;
    p.warmup_s = 5.0;
    auto built = bench_detail::build_system(p);
    built.sys->run_until(static_cast<std::uint64_t>((p.warmup_s + p.duration_s) * 1e6));
    const Store& st = built.sys->store_node().store();
    if (!(st.snapshot() == replay_log(st.initial_population(), st.commit_log()))) {
      ++replay_failures;
      notes.push_back(fmtf("replay mismatch under %s", to_string(pr.mode)));
    }
  }
  if (replay_failures > 0) r.pass = false;

  r.detail = r.pass ? fmtf("write-heavy mix %.2fx read cache, read-only mix %.3fx; %zu/%zu "
                           "replay probes consistent",
                           pay_ratio, os_ratio, probes.size() - replay_failures, probes.size())
                    : join(notes, "; ");
  return r;
}

// ---------------------------------------------------------------------------

std::vector<CritResult> run_experiment_criteria() {
  return {criterion4(), criterion5(), criterion6(), criterion7(),
          criterion8(), criterion9(), criterion10()};
}

CritResult criterion11(const std::vector<CritResult>& first, const std::vector<CritResult>& second) {
  CritResult r{11, "determinism"};
  std::vector<std::string> notes;
  std::size_t files = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].artifacts.size() != second[i].artifacts.size()) {
      r.pass = false;
      notes.push_back(fmtf("criterion %d emitted a different artifact count", first[i].id));
      continue;
    }
    for (std::size_t a = 0; a < first[i].artifacts.size(); ++a) {
      ++files;
      if (first[i].artifacts[a].second != second[i].artifacts[a].second) {
        r.pass = false;
        notes.push_back(fmtf("%s differs between same-seed runs", first[i].artifacts[a].first.c_str()));
      }
    }
  }
  r.detail = r.pass ? fmtf("%zu result tables byte-identical across two same-seed executions", files)
                    : join(notes, "; ");
  return r;
}

}  // namespace

int main() {
  const std::string artifact_dir = "acceptance_artifacts";
  std::filesystem::create_directories(artifact_dir);

  std::vector<CritResult> results;
  results.push_back(criterion1());
  results.push_back(criterion2());
  results.push_back(criterion3());

  auto first = run_experiment_criteria();
  auto second = run_experiment_criteria();
  for (const auto& c : first) results.push_back(c);
  results.push_back(criterion11(first, second));

  int failures = 0;
  for (const auto& c : results) {
    for (const auto& [name, content] : c.artifacts) {
      std::ofstream out(artifact_dir + "/" + name);
      out << content;
    }
    if (!c.pass) ++failures;
    std::printf("CRITERION %2d (%s): %s — %s\n", c.id, c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures;
}
