// Key-value store daemon speaking the wire format over UDP.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>

#include "gotthard/udp.hpp"
#include "gotthard/workloads.hpp"

namespace {
gotthard::StoreDaemon* g_daemon = nullptr;
void handle_signal(int) {
  if (g_daemon) g_daemon->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transactional key-value store daemon"};
  std::string listen = "0.0.0.0:9090";
  std::string populate_file;
  std::uint64_t stats_interval = 0;
  app.add_option("--listen", listen, "address:port to bind")->capture_default_str();
  app.add_option("--populate-file", populate_file,
                 "CSV of key,value-hex pairs loaded before serving");
  app.add_option("--stats-interval", stats_interval,
                 "seconds between stats lines on stdout (0 = quiet)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::uint32_t, gotthard::Value128>> population;
    if (!populate_file.empty()) population = gotthard::read_population_csv(populate_file);

    gotthard::StoreDaemon daemon(gotthard::parse_endpoint(listen), population);
    g_daemon = &daemon;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::fprintf(stderr, "store listening on %s (%zu keys preloaded)\n",
                 daemon.local().to_string().c_str(), population.size());
    daemon.run(stats_interval);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
