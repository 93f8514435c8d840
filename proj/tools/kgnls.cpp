#include <atomic>
#include <csignal>

#include "kgnls/cli.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_sigint(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);
  std::signal(SIGTERM, on_sigint);
  return kgnls::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr, &g_stop);
}
