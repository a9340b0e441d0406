// Middlebox daemon: forwards, caches, or optimistically aborts transactions
// between clients and the store.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>

#include "gotthard/udp.hpp"

namespace {
gotthard::SwitchDaemon* g_daemon = nullptr;
void handle_signal(int) {
  if (g_daemon) g_daemon->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transaction-aware middlebox daemon"};
  std::string listen = "0.0.0.0:9091";
  std::string store_addr;
  std::string mode_name = "forward";
  std::size_t cache_capacity = 1024;
  app.add_option("--listen", listen, "address:port to bind")->capture_default_str();
  app.add_option("--store-addr", store_addr, "address:port of the store daemon")->required();
  app.add_option("--mode", mode_name, "forward | read_cache | gotthard")
      ->capture_default_str();
  app.add_option("--cache-capacity", cache_capacity, "cache entries kept (LRU)")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  auto mode = gotthard::switch_mode_from_string(mode_name);
  if (!mode) {
    std::fprintf(stderr, "error: unknown mode '%s'\n", mode_name.c_str());
    return 1;
  }

  try {
    gotthard::SwitchDaemon daemon(gotthard::parse_endpoint(listen),
                                  gotthard::parse_endpoint(store_addr), *mode, cache_capacity);
    g_daemon = &daemon;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::fprintf(stderr, "switch listening on %s, mode=%s, store=%s\n",
                 daemon.local().to_string().c_str(), mode_name.c_str(), store_addr.c_str());
    daemon.run();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
