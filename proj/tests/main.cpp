#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <spdlog/spdlog.h>

#include <csignal>

int main(int argc, char** argv) {
  // Pipes to spawned victims report a dead peer as EPIPE, like the CLI.
  std::signal(SIGPIPE, SIG_IGN);
  spdlog::set_level(spdlog::level::warn);
  return doctest::Context(argc, argv).run();
}
