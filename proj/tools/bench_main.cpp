// Benchmark driver: sweeps experiment configurations through the network
// simulator, emits CSV metrics, and evaluates trend assertions on results.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gotthard/bench.hpp"

using namespace gotthard;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& cdf_path, unsigned jobs) {
  ExperimentConfig cfg = parse_experiment_file(config_path);
  auto records = run_experiment(cfg, jobs);
  if (out_path.empty())
    emit_csv(records, std::cout);
  else
    emit_csv(records, out_path);
  if (!cdf_path.empty()) emit_cdf(records, cdf_path);
  if (!out_path.empty())
    std::fprintf(stderr, "%zu rows -> %s\n", records.size(), out_path.c_str());
  return 0;
}

int cmd_motivation(const std::vector<double>& write_fractions, std::uint32_t clients,
                   double rtt_ms, double delta, std::uint64_t target, std::uint64_t seed,
                   const std::string& out_path) {
  std::vector<MotivationRecord> rows;
  for (SwitchMode mode : {SwitchMode::Forward, SwitchMode::ReadCache, SwitchMode::Gotthard}) {
    for (double w : write_fractions) {
      RunParams p;
      p.mode = mode;
      p.num_clients = clients;
      p.rtt_ms = rtt_ms;
      p.delta = delta;
      p.write_fraction = w;
      p.seed = seed;
      rows.push_back(motivation_run(p, target));
    }
  }
  if (out_path.empty())
    emit_motivation_csv(rows, std::cout);
  else
    emit_motivation_csv(rows, out_path);
  return 0;
}

int cmd_check(const std::string& csv_path, const std::string& assertions_path) {
  CsvTable table = load_csv_file(csv_path);
  std::ifstream in(assertions_path);
  if (!in) throw std::runtime_error("cannot read assertions: " + assertions_path);
  std::stringstream script;
  script << in.rdbuf();
  auto failures = check_trends(table, script.str());
  for (const auto& f : failures) std::fprintf(stderr, "%s\n", f.c_str());
  std::printf("%zu assertion failure(s)\n", failures.size());
  return failures.size() > 200 ? 200 : static_cast<int>(failures.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transaction benchmark driver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "sweep an experiment config and emit metrics CSV");
  std::string config_path, out_path, cdf_path;
  unsigned jobs = 1;
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_path, "metrics CSV path (default stdout)");
  run->add_option("--cdf", cdf_path, "also write a latency CDF CSV here");
  run->add_option("--jobs", jobs, "parallel sweep points")->capture_default_str();

  auto* motivation =
      app.add_subcommand("motivation", "time-to-N-commits comparison across modes");
  std::vector<double> write_fractions{0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::uint32_t clients = 8;
  double rtt_ms = 100.0, delta = 0.2;
  std::uint64_t target = 1000, seed = 1;
  std::string motivation_out;
  motivation->add_option("--write-fractions", write_fractions, "write shares to sweep")
      ->delimiter(',');
  motivation->add_option("--clients", clients, "concurrent clients")->capture_default_str();
  motivation->add_option("--rtt", rtt_ms, "client-store round trip, ms")->capture_default_str();
  motivation->add_option("--delta", delta, "switch position along the path")
      ->capture_default_str();
  motivation->add_option("--target", target, "committed transactions to reach")
      ->capture_default_str();
  motivation->add_option("--seed", seed, "run seed")->capture_default_str();
  motivation->add_option("--out", motivation_out, "CSV path (default stdout)");

  auto* check = app.add_subcommand("check", "evaluate trend assertions against a metrics CSV");
  std::string csv_path, assertions_path;
  check->add_option("csv", csv_path, "metrics CSV from `bench run`")->required();
  check->add_option("assertions", assertions_path, "assertion script")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_path, cdf_path, jobs);
    if (motivation->parsed())
      return cmd_motivation(write_fractions, clients, rtt_ms, delta, target, seed,
                            motivation_out);
    if (check->parsed()) return cmd_check(csv_path, assertions_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 201;
  }
  return 0;
}
