// Closed-loop workload client: runs transactions against a store or
// middlebox over UDP and reports per-transaction results.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>

#include "gotthard/udp.hpp"
#include "gotthard/workloads.hpp"

using namespace gotthard;

namespace {

std::unique_ptr<ProgramSource> make_source(const std::string& workload, std::uint64_t seed,
                                           std::uint32_t client_id, std::uint32_t num_keys,
                                           double write_fraction, double zipf) {
  if (workload == "micro") {
    MicroConfig cfg;
    cfg.num_keys = num_keys;
    cfg.write_fraction = write_fraction;
    cfg.zipf = zipf;
    cfg.seed = seed;
    return std::make_unique<MicroSource>(cfg, client_id);
  }
  if (workload == "tpcc") {
    TpccConfig cfg;
    cfg.seed = seed;
    return std::make_unique<TpccSource>(cfg, client_id);
  }
  throw std::invalid_argument("unknown workload '" + workload + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop transaction client"};
  std::string server_addr;
  std::string workload = "micro";
  std::string report_csv;
  std::uint64_t seed = 1;
  std::uint32_t client_id = 0;
  std::uint64_t duration_s = 10;
  std::uint64_t count = 0;
  std::uint32_t num_keys = 10;
  double write_fraction = 0.2;
  double zipf = 0.0;
  std::uint64_t retransmit_ms = 1000;
  app.add_option("--server-addr", server_addr, "address:port of store or switch")->required();
  app.add_option("--workload", workload, "micro | tpcc")->capture_default_str();
  app.add_option("--seed", seed, "workload seed")->capture_default_str();
  app.add_option("--client-id", client_id, "distinguishes generators across clients")
      ->capture_default_str();
  app.add_option("--duration", duration_s, "seconds to run (ignored when --count is set)")
      ->capture_default_str();
  app.add_option("--count", count, "stop after this many transactions instead");
  app.add_option("--num-keys", num_keys, "micro workload key count")->capture_default_str();
  app.add_option("--write-fraction", write_fraction, "micro workload write share")
      ->capture_default_str();
  app.add_option("--zipf", zipf, "micro workload skew exponent")->capture_default_str();
  app.add_option("--retransmit-ms", retransmit_ms, "resend timeout for lost datagrams")
      ->capture_default_str();
  app.add_option("--report-csv", report_csv, "write one row per transaction here");
  CLI11_PARSE(app, argc, argv);

  try {
    auto source = make_source(workload, seed, client_id, num_keys, write_fraction, zipf);
    UdpClientDriver driver(parse_endpoint(server_addr), retransmit_ms);
    auto outcomes = count ? driver.run_transactions(*source, count)
                          : driver.run_for(*source, duration_s);

    std::uint64_t total_latency = 0, switch_aborts = 0, store_aborts = 0, attempts = 0;
    for (const auto& o : outcomes) {
      total_latency += o.latency_us();
      switch_aborts += o.switch_aborts;
      store_aborts += o.store_aborts;
      attempts += o.attempts;
    }
    std::printf("committed=%zu mean_latency_ms=%.3f mean_attempts=%.3f "
                "switch_aborts=%llu store_aborts=%llu retransmits=%llu\n",
                outcomes.size(),
                outcomes.empty() ? 0.0 : total_latency / 1000.0 / outcomes.size(),
                outcomes.empty() ? 0.0 : static_cast<double>(attempts) / outcomes.size(),
                static_cast<unsigned long long>(switch_aborts),
                static_cast<unsigned long long>(store_aborts),
                static_cast<unsigned long long>(driver.retransmits()));

    if (!report_csv.empty()) {
      std::ofstream out(report_csv);
      if (!out) throw std::runtime_error("cannot write " + report_csv);
      out << "kind,latency_us,attempts,fetch_rounds,switch_aborts,store_aborts\n";
      for (const auto& o : outcomes)
        out << to_string(o.kind) << ',' << o.latency_us() << ',' << o.attempts << ','
            << o.fetch_rounds << ',' << o.switch_aborts << ',' << o.store_aborts << '\n';
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
