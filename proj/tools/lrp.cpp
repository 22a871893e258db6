// lrp run <program.lrp> --world <file> [--tick-ms N] [--virtual --ticks N]
//         [--trace <file>] [--serve <port>] [--script <file>]
//
// LRP_LOG=off|error|warning|info selects which diagnostics reach stderr
// (default: warning).

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lrp/session.hpp"

namespace {

std::atomic<bool> g_interrupt{false};

void on_signal(int) { g_interrupt = true; }

std::optional<lrp::Severity> log_threshold_from_env() {
  const char* env = std::getenv("LRP_LOG");
  const std::string level = env ? env : "warning";
  if (level == "off" || level == "none") return std::nullopt;
  if (level == "error") return lrp::Severity::error;
  if (level == "info" || level == "debug") return lrp::Severity::info;
  return lrp::Severity::warning;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Live robot programming runtime"};
  app.require_subcommand(1);

  lrp::SessionConfig config;
  bool virtual_time = false;
  std::int64_t ticks = 0;
  std::string trace, script;
  int port = -1;
  bool no_watch = false;

  auto* run = app.add_subcommand("run", "Run a program against a simulated world");
  run->add_option("program", config.program_path, "LRP source file")->required();
  run->add_option("--world", config.world_path, "World description (JSON)")->required();
  run->add_option("--tick-ms", config.tick_ms, "Tick length in milliseconds")->check(CLI::PositiveNumber);
  auto* virt = run->add_flag("--virtual", virtual_time, "Run in virtual time, as fast as possible");
  auto* ticks_opt = run->add_option("--ticks", ticks, "Stop after N ticks")->check(CLI::PositiveNumber);
  run->add_option("--trace", trace, "Write a JSON-lines trace");
  run->add_option("--serve", port, "Serve snapshots and accept commands on 127.0.0.1:PORT")
      ->check(CLI::Range(0, 65535));
  run->add_option("--script", script, "Scripted edits and commands");
  run->add_flag("--no-watch", no_watch, "Do not watch the program file for edits");
  virt->needs(ticks_opt);

  CLI11_PARSE(app, argc, argv);

  config.mode = virtual_time ? lrp::ClockMode::virtual_time : lrp::ClockMode::wallclock;
  if (*ticks_opt) config.max_ticks = ticks;
  if (!trace.empty()) config.trace_path = trace;
  if (!script.empty()) config.script_path = script;
  if (port >= 0) config.serve_port = static_cast<std::uint16_t>(port);
  config.log_threshold = log_threshold_from_env();
  config.watch_program = !no_watch;

  auto session = lrp::Session::open(config);
  if (!session) {
    std::cerr << "lrp: " << session.error() << '\n';
    return 1;
  }
  if (auto p = (*session)->server_port()) std::cerr << "lrp: serving on 127.0.0.1:" << *p << '\n';

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int status = (*session)->run(&g_interrupt);

  const auto& s = **session;
  std::cout << "ticks " << s.tick() << '\n';
  const auto snap = s.snapshot();
  for (const auto& m : snap["machines"]) std::cout << "active " << m["active_path"].get<std::string>() << '\n';
  if (s.collided_ever()) std::cout << "collision\n";
  return status;
}
