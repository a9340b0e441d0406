// Experiment runner: parameter sweeps over the simulator, CSV/CDF emission,
// and a small line-based assertion language for checking result trends.
#pragma once

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gotthard/netsim.hpp"
#include "gotthard/workloads.hpp"

namespace gotthard {

// ---------------------------------------------------------------------------
// Configuration.

// One fully-resolved simulation: workload, topology, mode, and duration.
struct RunParams {
  std::string workload = "micro";  // micro | tpcc | locality
  SwitchMode mode = SwitchMode::Forward;
  std::uint32_t num_clients = 8;
  double rtt_ms = 100.0;
  double delta = 0.2;
  double write_fraction = 0.2;
  double zipf = 0.0;
  std::uint32_t num_keys = 10;
  double locality = 1.0;
  std::uint32_t group_size = 8;
  std::uint32_t keys_per_group = 5;
  std::array<std::uint32_t, 5> mix = {45, 43, 4, 4, 4};
  double duration_s = 180.0;  // measured window, after warmup
  double warmup_s = 5.0;
  std::uint64_t seed = 1;
  std::size_t cache_capacity = 1024;
  ServiceParams services;
  double sweep_value = 0.0;  // echoed into the CSV row
};

// Parsed "key = value" experiment file: fixed parameters plus exactly one
// sweep axis applied across all requested modes.
struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<SwitchMode> modes;
  std::string sweep;  // delta | write_fraction | num_clients | zipf | locality
  std::vector<double> values;
  RunParams base;
};

namespace bench_detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(trim(part));
  return out;
}

inline std::array<std::uint32_t, 5> parse_mix(const std::string& text) {
  static const std::map<std::string, std::size_t> names = {
      {"neworder", 0}, {"payment", 1}, {"orderstatus", 2}, {"delivery", 3}, {"stocklevel", 4}};
  auto it = names.find(text);
  if (it != names.end()) {
    std::array<std::uint32_t, 5> mix{};
    mix[it->second] = 100;
    return mix;
  }
  auto parts = split(text, ',');
  if (parts.size() != 5)
    throw std::invalid_argument("mix: expected 5 percentages or a transaction name, got '" +
                                text + "'");
  std::array<std::uint32_t, 5> mix{};
  for (std::size_t i = 0; i < 5; ++i) mix[i] = static_cast<std::uint32_t>(std::stoul(parts[i]));
  return mix;
}

}  // namespace bench_detail

inline ExperimentConfig parse_experiment_text(const std::string& text) {
  using bench_detail::split;
  using bench_detail::trim;
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_sweep = false, have_values = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key == "name") cfg.name = val;
    else if (key == "workload") cfg.base.workload = val;
    else if (key == "modes") {
      for (const auto& m : split(val, ',')) {
        auto mode = switch_mode_from_string(m);
        if (!mode) throw std::invalid_argument("config: unknown mode '" + m + "'");
        cfg.modes.push_back(*mode);
      }
    } else if (key == "sweep") {
      if (have_sweep) throw std::invalid_argument("config: more than one sweep axis");
      cfg.sweep = val;
      have_sweep = true;
    } else if (key == "values") {
      for (const auto& v : split(val, ',')) cfg.values.push_back(std::stod(v));
      have_values = true;
    } else if (key == "num_clients") cfg.base.num_clients = std::stoul(val);
    else if (key == "rtt_ms") cfg.base.rtt_ms = std::stod(val);
    else if (key == "delta") cfg.base.delta = std::stod(val);
    else if (key == "write_fraction") cfg.base.write_fraction = std::stod(val);
    else if (key == "zipf") cfg.base.zipf = std::stod(val);
    else if (key == "num_keys") cfg.base.num_keys = std::stoul(val);
    else if (key == "locality") cfg.base.locality = std::stod(val);
    else if (key == "group_size") cfg.base.group_size = std::stoul(val);
    else if (key == "keys_per_group") cfg.base.keys_per_group = std::stoul(val);
    else if (key == "mix") cfg.base.mix = bench_detail::parse_mix(val);
    else if (key == "duration_s") cfg.base.duration_s = std::stod(val);
    else if (key == "warmup_s") cfg.base.warmup_s = std::stod(val);
    else if (key == "seed") cfg.base.seed = std::stoull(val);
    else if (key == "cache_capacity") cfg.base.cache_capacity = std::stoul(val);
    else if (key == "store_service_ms") cfg.base.services.store_service_ms = std::stod(val);
    else if (key == "switch_service_ms") cfg.base.services.switch_service_ms = std::stod(val);
    else if (key == "client_service_ms") cfg.base.services.client_service_ms = std::stod(val);
    else if (key == "client_jitter_ms") cfg.base.services.client_jitter_ms = std::stod(val);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  if (cfg.base.workload != "micro" && cfg.base.workload != "tpcc" &&
      cfg.base.workload != "locality")
    throw std::invalid_argument("config: unknown workload '" + cfg.base.workload + "'");
  if (cfg.modes.empty()) throw std::invalid_argument("config: no modes listed");
  if (!have_sweep || !have_values || cfg.values.empty())
    throw std::invalid_argument("config: exactly one sweep axis with values is required");
  static const char* axes[] = {"delta", "write_fraction", "num_clients", "zipf", "locality"};
  if (std::find(std::begin(axes), std::end(axes), cfg.sweep) == std::end(axes))
    throw std::invalid_argument("config: unknown sweep axis '" + cfg.sweep + "'");
  return cfg;
}

inline ExperimentConfig parse_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_text(ss.str());
}

inline RunParams apply_sweep(RunParams base, const std::string& axis, double value) {
  if (axis == "delta") base.delta = value;
  else if (axis == "write_fraction") base.write_fraction = value;
  else if (axis == "num_clients") base.num_clients = static_cast<std::uint32_t>(value);
  else if (axis == "zipf") base.zipf = value;
  else if (axis == "locality") base.locality = value;
  else throw std::invalid_argument("unknown sweep axis: " + axis);
  base.sweep_value = value;
  return base;
}

// ---------------------------------------------------------------------------
// Metrics.

struct MetricsRecord {
  std::string mode;
  double sweep_value = 0.0;
  std::uint64_t committed = 0;
  double committed_txn_per_sec = 0.0;
  double mean_commit_latency_ms = 0.0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  std::uint64_t aborts_by_switch = 0;
  std::uint64_t aborts_by_store = 0;
  double mean_attempts = 0.0;
  std::uint64_t max_attempts = 0;
  std::map<std::uint32_t, std::uint64_t> attempts_hist;
  std::uint64_t store_commits = 0;
  std::uint64_t trace_hash = 0;
  std::vector<double> latencies_ms;  // sorted; feeds the CDF output
};

namespace bench_detail {

inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * sorted.size()));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank, sorted.size()) - 1];
}

inline std::string hist_to_string(const std::map<std::uint32_t, std::uint64_t>& h) {
  std::string out;
  for (const auto& [attempts, count] : h) {
    if (!out.empty()) out += ';';
    out += std::to_string(attempts) + ":" + std::to_string(count);
  }
  return out.empty() ? "-" : out;
}

inline std::vector<std::unique_ptr<ProgramSource>> make_sources(const RunParams& p,
                                                                std::uint32_t num_clients) {
  std::vector<std::unique_ptr<ProgramSource>> sources;
  for (std::uint32_t c = 0; c < num_clients; ++c) {
    if (p.workload == "micro") {
      MicroConfig mc;
      mc.num_keys = p.num_keys;
      mc.write_fraction = p.write_fraction;
      mc.zipf = p.zipf;
      mc.seed = p.seed;
      sources.push_back(std::make_unique<MicroSource>(mc, c));
    } else if (p.workload == "locality") {
      LocalityConfig lc;
      lc.group_size = p.group_size;
      lc.keys_per_group = p.keys_per_group;
      lc.locality = p.locality;
      lc.zipf = p.zipf;
      lc.write_fraction = p.write_fraction;
      lc.seed = p.seed;
      sources.push_back(std::make_unique<LocalityMicroSource>(lc, c));
    } else if (p.workload == "tpcc") {
      TpccConfig tc;
      tc.seed = p.seed;
      tc.mix = p.mix;
      sources.push_back(std::make_unique<TpccSource>(tc, c));
    } else {
      throw std::invalid_argument("unknown workload: " + p.workload);
    }
  }
  return sources;
}

struct BuiltSystem {
  std::unique_ptr<SimSystem> sys;
  std::uint32_t num_clients = 0;
};

inline BuiltSystem build_system(const RunParams& p) {
  std::uint32_t num_clients = p.num_clients;
  Topology topo;
  std::vector<std::pair<std::uint32_t, Value128>> population;
  if (p.workload == "locality") {
    num_clients = 2 * p.group_size;
    topo = locality_topology(p.group_size, p.rtt_ms, p.delta, p.mode);
    population = micro_population(2 * p.keys_per_group);
  } else if (p.workload == "tpcc") {
    topo = single_switch_topology(num_clients, p.rtt_ms, p.delta, p.mode);
    TpccConfig tc;
    tc.seed = p.seed;
    population = tpcc_load(tc);
  } else {
    topo = single_switch_topology(num_clients, p.rtt_ms, p.delta, p.mode);
    population = micro_population(p.num_keys);
  }
  BuiltSystem built;
  built.sys = std::make_unique<SimSystem>(topo, p.services, make_sources(p, num_clients),
                                          p.seed, p.cache_capacity, population);
  built.num_clients = num_clients;
  return built;
}

}  // namespace bench_detail

// Runs one simulation and reduces outcomes completed inside the measured
// window (after warmup) into a MetricsRecord.
inline MetricsRecord run_one(const RunParams& p) {
  auto built = bench_detail::build_system(p);
  SimSystem& sys = *built.sys;

  std::uint64_t warmup_us = static_cast<std::uint64_t>(p.warmup_s * 1'000'000.0);
  std::uint64_t end_us = warmup_us + static_cast<std::uint64_t>(p.duration_s * 1'000'000.0);

  MetricsRecord rec;
  rec.mode = to_string(p.mode);
  rec.sweep_value = p.sweep_value;
  std::vector<double> latencies;
  std::uint64_t attempts_sum = 0;

  sys.set_outcome_sink([&](std::uint32_t, const TxnOutcome& o) {
    if (o.completed_us < warmup_us || o.completed_us > end_us) return;
    ++rec.committed;
    latencies.push_back(static_cast<double>(o.latency_us()) / 1000.0);
    rec.aborts_by_switch += o.switch_aborts;
    rec.aborts_by_store += o.store_aborts;
    attempts_sum += o.attempts;
    rec.attempts_hist[o.attempts]++;
    rec.max_attempts = std::max<std::uint64_t>(rec.max_attempts, o.attempts);
  });

  if (end_us > 0) sys.run_until(end_us);

  std::sort(latencies.begin(), latencies.end());
  rec.latencies_ms = latencies;
  if (rec.committed > 0) {
    double sum = 0.0;
    for (double l : latencies) sum += l;
    rec.mean_commit_latency_ms = sum / static_cast<double>(rec.committed);
    rec.p50_ms = bench_detail::percentile(latencies, 0.50);
    rec.p90_ms = bench_detail::percentile(latencies, 0.90);
    rec.p99_ms = bench_detail::percentile(latencies, 0.99);
    rec.mean_attempts = static_cast<double>(attempts_sum) / static_cast<double>(rec.committed);
  }
  if (p.duration_s > 0)
    rec.committed_txn_per_sec = static_cast<double>(rec.committed) / p.duration_s;
  rec.store_commits = sys.store_node().store().stats().commits;
  rec.trace_hash = sys.sim().trace_hash();
  return rec;
}

// Sweep driver: one row per (sweep value, mode), in that order. `jobs` > 1
// runs the independent simulations on a small thread pool; row order is by
// index, so parallel and serial runs emit identical tables.
inline std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg,
                                                 unsigned jobs = 1) {
  std::vector<RunParams> params;
  for (double v : cfg.values)
    for (SwitchMode m : cfg.modes) {
      RunParams p = apply_sweep(cfg.base, cfg.sweep, v);
      p.mode = m;
      params.push_back(p);
    }
  std::vector<MetricsRecord> rows(params.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < params.size(); ++i) rows[i] = run_one(params[i]);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < params.size(); i = next.fetch_add(1))
      rows[i] = run_one(params[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::min<std::size_t>(jobs, params.size()); ++j)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

// ---------------------------------------------------------------------------
// Motivation experiment: virtual time until the Nth committed transaction on
// a single shared counter, per mode and write fraction.

struct MotivationRecord {
  std::string mode;
  double write_fraction = 0.0;
  double completion_s = 0.0;
  std::uint64_t committed = 0;
  std::uint64_t aborts_by_switch = 0;
  std::uint64_t aborts_by_store = 0;
  std::uint64_t trace_hash = 0;
};

inline MotivationRecord motivation_run(RunParams p, std::uint64_t target_commits = 1000) {
  p.workload = "micro";
  p.num_keys = 1;  // one shared value, as in the original completion-time setup
  p.zipf = 0.0;
  auto built = bench_detail::build_system(p);
  SimSystem& sys = *built.sys;

  MotivationRecord rec;
  rec.mode = to_string(p.mode);
  rec.write_fraction = p.write_fraction;

  std::uint64_t completion_us = 0;
  sys.set_outcome_sink([&](std::uint32_t, const TxnOutcome& o) {
    if (rec.committed >= target_commits) return;
    ++rec.committed;
    rec.aborts_by_switch += o.switch_aborts;
    rec.aborts_by_store += o.store_aborts;
    if (rec.committed == target_commits) {
      completion_us = o.completed_us;
      sys.sim().request_stop();
    }
  });

  // generous ceiling; the closed loop reaches the target long before this
  std::uint64_t cap_us = 4'000'000'000ull;
  sys.run_until(cap_us);
  rec.completion_s = static_cast<double>(completion_us ? completion_us : cap_us) / 1'000'000.0;
  rec.trace_hash = sys.sim().trace_hash();
  return rec;
}

// ---------------------------------------------------------------------------
// CSV output. Fixed six-decimal formatting keeps same-seed reruns
// byte-identical.

namespace bench_detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string fmt_hash(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace bench_detail

inline constexpr const char* kMetricsCsvHeader =
    "mode,sweep_value,committed,committed_txn_per_sec,mean_commit_latency_ms,p50_ms,p90_ms,"
    "p99_ms,aborts_by_switch,aborts_by_store,mean_attempts,max_attempts,attempts_hist,"
    "store_commits,trace_hash";

inline void emit_csv(const std::vector<MetricsRecord>& records, std::ostream& out) {
  using bench_detail::fmt;
  out << kMetricsCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.mode << ',' << fmt(r.sweep_value) << ',' << r.committed << ','
        << fmt(r.committed_txn_per_sec) << ',' << fmt(r.mean_commit_latency_ms) << ','
        << fmt(r.p50_ms) << ',' << fmt(r.p90_ms) << ',' << fmt(r.p99_ms) << ','
        << r.aborts_by_switch << ',' << r.aborts_by_store << ',' << fmt(r.mean_attempts) << ','
        << r.max_attempts << ',' << bench_detail::hist_to_string(r.attempts_hist) << ','
        << r.store_commits << ',' << bench_detail::fmt_hash(r.trace_hash) << "\n";
  }
}

inline void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  emit_csv(records, out);
}

// Latency CDF samples per row: mode, sweep value, latency, cumulative fraction.
inline void emit_cdf(const std::vector<MetricsRecord>& records, std::ostream& out) {
  using bench_detail::fmt;
  out << "mode,sweep_value,latency_ms,fraction\n";
  for (const auto& r : records) {
    std::size_t n = r.latencies_ms.size();
    for (std::size_t i = 0; i < n; ++i)
      out << r.mode << ',' << fmt(r.sweep_value) << ',' << fmt(r.latencies_ms[i]) << ','
          << fmt(static_cast<double>(i + 1) / static_cast<double>(n)) << "\n";
  }
}

inline void emit_cdf(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cdf: " + path);
  emit_cdf(records, out);
}

inline constexpr const char* kMotivationCsvHeader =
    "mode,write_fraction,completion_s,committed,aborts_by_switch,aborts_by_store,trace_hash";

inline void emit_motivation_csv(const std::vector<MotivationRecord>& records,
                                std::ostream& out) {
  using bench_detail::fmt;
  out << kMotivationCsvHeader << "\n";
  for (const auto& r : records)
    out << r.mode << ',' << fmt(r.write_fraction) << ',' << fmt(r.completion_s) << ','
        << r.committed << ',' << r.aborts_by_switch << ',' << r.aborts_by_store << ','
        << bench_detail::fmt_hash(r.trace_hash) << "\n";
}

inline void emit_motivation_csv(const std::vector<MotivationRecord>& records,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  emit_motivation_csv(records, out);
}

// ---------------------------------------------------------------------------
// CSV reading and trend assertions.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::out_of_range("csv: no column named '" + name + "'");
  }
  const std::string& cell(std::size_t row, const std::string& col) const {
    return rows.at(row).at(column(col));
  }
  double number(std::size_t row, const std::string& col) const {
    return std::stod(cell(row, col));
  }
};

inline CsvTable load_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  t.header = bench_detail::split(line, ',');
  while (std::getline(in, line)) {
    if (bench_detail::trim(line).empty()) continue;
    auto cells = bench_detail::split(line, ',');
    if (cells.size() != t.header.size())
      throw std::runtime_error("csv: row width mismatch: " + line);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline CsvTable load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read csv: " + path);
  return load_csv(in);
}

// Trend assertion language, one assertion per line ('#' comments allowed):
//
//   ratio_le <metric> <mode_a> <mode_b> <bound> [col=val ...]
//   ratio_ge <metric> <mode_a> <mode_b> <bound> [col=val ...]
//   within_frac <metric> <mode_a> <mode_b> <frac> [col=val ...]
//   cmp_lt|cmp_le|cmp_ge <metric> <mode_a> <mode_b> [col=val ...]
//   mono_nonincr|mono_nondecr <metric> <mode> [allow_inversions=N] [slack=F] [col=val ...]
//
// ratio/cmp/within select exactly one row per mode after applying the
// filters; mono walks the mode's rows in file order (the sweep order).
class TrendChecker {
 public:
  explicit TrendChecker(const CsvTable& table) : t_(table) {}

  // Returns human-readable failure lines; empty means every assertion held.
  std::vector<std::string> check(const std::string& script) const {
    std::vector<std::string> failures;
    std::istringstream in(script);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = bench_detail::trim(line);
      if (line.empty()) continue;
      try {
        if (auto err = check_line(line)) failures.push_back(*err);
      } catch (const std::exception& e) {
        failures.push_back("line " + std::to_string(lineno) + " '" + line +
                           "': " + e.what());
      }
    }
    return failures;
  }

 private:
  struct Filter {
    std::string col;
    std::string val;
  };

  static bool numeric_equal(const std::string& a, const std::string& b) {
    try {
      std::size_t ia = 0, ib = 0;
      double da = std::stod(a, &ia);
      double db = std::stod(b, &ib);
      if (ia == a.size() && ib == b.size()) return std::abs(da - db) < 1e-9;
    } catch (...) {
    }
    return a == b;
  }

  std::vector<std::size_t> select(const std::string& mode,
                                  const std::vector<Filter>& filters) const {
    std::vector<std::size_t> out;
    std::size_t mode_col = t_.column("mode");
    for (std::size_t r = 0; r < t_.rows.size(); ++r) {
      if (t_.rows[r][mode_col] != mode) continue;
      bool ok = true;
      for (const auto& f : filters)
        if (!numeric_equal(t_.rows[r][t_.column(f.col)], f.val)) {
          ok = false;
          break;
        }
      if (ok) out.push_back(r);
    }
    return out;
  }

  double single(const std::string& metric, const std::string& mode,
                const std::vector<Filter>& filters) const {
    auto rows = select(mode, filters);
    if (rows.size() != 1)
      throw std::runtime_error("selector matched " + std::to_string(rows.size()) +
                               " rows for mode=" + mode + " (need exactly 1)");
    return t_.number(rows[0], metric);
  }

  std::optional<std::string> check_line(const std::string& line) const {
    auto tokens = bench_detail::split(line, ' ');
    tokens.erase(std::remove(tokens.begin(), tokens.end(), std::string{}), tokens.end());
    const std::string& op = tokens.at(0);

    std::vector<Filter> filters;
    std::map<std::string, double> opts;
    std::vector<std::string> args;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string::npos) {
        args.push_back(tokens[i]);
      } else {
        std::string k = tokens[i].substr(0, eq), v = tokens[i].substr(eq + 1);
        if (k == "allow_inversions" || k == "slack") opts[k] = std::stod(v);
        else filters.push_back({k, v});
      }
    }

    auto fail = [&](const std::string& detail) -> std::optional<std::string> {
      return "FAIL " + line + "  [" + detail + "]";
    };

    if (op == "ratio_le" || op == "ratio_ge" || op == "within_frac") {
      const std::string& metric = args.at(0);
      double a = single(metric, args.at(1), filters);
      double b = single(metric, args.at(2), filters);
      double bound = std::stod(args.at(3));
      if (b == 0.0) return fail("denominator is zero");
      double ratio = a / b;
      char detail[128];
      std::snprintf(detail, sizeof(detail), "a=%.6f b=%.6f ratio=%.4f", a, b, ratio);
      if (op == "ratio_le" && !(ratio <= bound)) return fail(detail);
      if (op == "ratio_ge" && !(ratio >= bound)) return fail(detail);
      if (op == "within_frac" && !(std::abs(ratio - 1.0) <= bound)) return fail(detail);
      return std::nullopt;
    }
    if (op == "cmp_lt" || op == "cmp_le" || op == "cmp_ge") {
      const std::string& metric = args.at(0);
      double a = single(metric, args.at(1), filters);
      double b = single(metric, args.at(2), filters);
      char detail[128];
      std::snprintf(detail, sizeof(detail), "a=%.6f b=%.6f", a, b);
      if (op == "cmp_lt" && !(a < b)) return fail(detail);
      if (op == "cmp_le" && !(a <= b)) return fail(detail);
      if (op == "cmp_ge" && !(a >= b)) return fail(detail);
      return std::nullopt;
    }
    if (op == "mono_nonincr" || op == "mono_nondecr") {
      const std::string& metric = args.at(0);
      auto rows = select(args.at(1), filters);
      if (rows.size() < 2) throw std::runtime_error("mono: need at least 2 rows");
      int allow = static_cast<int>(opts.count("allow_inversions") ? opts["allow_inversions"] : 0);
      double slack = opts.count("slack") ? opts["slack"] : 0.0;
      int used = 0;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        double prev = t_.number(rows[i - 1], metric);
        double cur = t_.number(rows[i], metric);
        bool ok = op == "mono_nonincr" ? cur <= prev : cur >= prev;
        if (ok) continue;
        double magnitude = prev == 0.0 ? 1.0 : std::abs(cur - prev) / std::abs(prev);
        if (used < allow && magnitude <= slack) {
          ++used;
          continue;
        }
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "step %zu: prev=%.6f cur=%.6f (inversion %.2f%%, used=%d allowed=%d)",
                      i, prev, cur, magnitude * 100.0, used, allow);
        return fail(detail);
      }
      return std::nullopt;
    }
    throw std::runtime_error("unknown assertion op '" + op + "'");
  }

  const CsvTable& t_;
};

inline std::vector<std::string> check_trends(const CsvTable& table, const std::string& script) {
  return TrendChecker(table).check(script);
}

}  // namespace gotthard
