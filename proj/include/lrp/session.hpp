#pragma once

// One live-programming session: bus, simulated robot, bridge and
// interpreter driven by a single tick loop. Everything that changes the
// session from outside (file edits, socket commands, scripted steps) goes
// through a command queue drained at the start of each loop iteration.

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "lrp/bridge.hpp"
#include "lrp/driver.hpp"
#include "lrp/expected.hpp"
#include "lrp/interpreter.hpp"
#include "lrp/live_update.hpp"
#include "lrp/pubsub.hpp"
#include "lrp/trace.hpp"
#include "lrp/world_file.hpp"

namespace lrp {

namespace wire {
class Server;
}

enum class ClockMode { wallclock, virtual_time };

struct SessionConfig {
  std::string program_path;
  std::string world_path;
  std::int64_t tick_ms = 50;
  ClockMode mode = ClockMode::wallclock;
  std::optional<std::int64_t> max_ticks;  // required in virtual mode
  std::optional<std::string> trace_path;
  std::optional<std::uint16_t> serve_port;
  std::optional<std::string> script_path;
  std::optional<Severity> log_threshold;  // diagnostics at or above go to stderr
  bool watch_program = true;
};

struct Command {
  enum class Kind { pause, resume, reset_world, load_source, snapshot };
  Kind kind = Kind::pause;
  std::string text;  // load_source only
  std::string origin = "command";  // "command", "file" or "script"
};

std::string_view to_string(Command::Kind k) noexcept;

/// Parses a wire message {"type", "payload"} into a command.
Expected<Command, std::string> parse_command(const Json& message);

/// Script lines: `<step> <action> [file]`, '#' starts a comment.
///   load <file>     submit the file's text as load_source
///   write <file>    overwrite the program file with the file's text
///   reset_world | pause | resume
/// Relative file names resolve against the script's directory. In virtual
/// mode <step> counts loop iterations (it equals the tick while not paused).
struct ScriptStep {
  enum class Action { load, write, reset_world, pause, resume };
  std::int64_t step = 0;
  Action action = Action::load;
  std::string file;
};

Expected<std::vector<ScriptStep>, std::string> parse_script(std::string_view text, const std::string& base_dir);

class Session {
 public:
  /// Reads the program and world files. Errors are human-readable messages.
  /// `trace_sink`, when given, receives the trace instead of trace_path.
  static Expected<std::unique_ptr<Session>, std::string> open(SessionConfig config,
                                                              std::ostream* trace_sink = nullptr);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// One loop iteration: apply due script steps, queued commands and file
  /// changes, then (unless paused) advance one tick.
  void step();

  /// Loops until max_ticks, `interrupt`, or (virtual mode) nothing left to
  /// do while paused. Returns the process exit status: 0, or 2 when the
  /// robot collided at any point.
  int run(const std::atomic<bool>* interrupt = nullptr);

  /// Thread-safe; executed at the start of the next loop iteration.
  void post(Command command);

  /// Runs a command immediately on the calling (tick) thread.
  Json execute(const Command& command);

  Json snapshot() const;

  std::int64_t tick() const noexcept { return tick_; }
  std::int64_t clock_step() const noexcept { return clock_step_; }
  bool paused() const noexcept { return paused_; }
  bool collided_ever() const noexcept { return collided_ever_; }
  const SessionConfig& config() const noexcept { return config_; }
  const std::string& source() const noexcept { return source_; }

  Interpreter& interpreter() noexcept { return *interpreter_; }
  sim::Driver& driver() noexcept { return *driver_; }
  bus::Bus& bus() noexcept { return *bus_; }
  std::shared_ptr<RobulabBridge> bridge() const { return bridge_.lock(); }
  std::optional<std::uint16_t> server_port() const;

  const std::vector<UpdateOutcome>& updates() const noexcept { return updates_; }

 private:
  Session(SessionConfig config, sim::WorldSpec world, std::string source, std::vector<ScriptStep> script,
          std::ostream* trace_sink);
  void diagnose(const Diagnostic& d);
  void apply_update(std::string_view text, std::string_view origin);
  void run_script_step(const ScriptStep& s);
  void maybe_push_snapshot(bool force);
  std::int64_t clock_ms() const;

  SessionConfig config_;
  std::unique_ptr<std::ostream> trace_file_;
  std::unique_ptr<TraceWriter> trace_;
  HostRegistry hosts_;
  std::unique_ptr<bus::Bus> bus_;
  std::unique_ptr<sim::Driver> driver_;
  std::weak_ptr<RobulabBridge> bridge_;
  std::unique_ptr<Interpreter> interpreter_;
  std::unique_ptr<FileWatcher> watcher_;
  std::string source_;
  std::vector<ScriptStep> script_;
  std::size_t script_next_ = 0;

  std::int64_t tick_ = 0;
  std::int64_t clock_step_ = 0;
  bool paused_ = false;
  bool collided_ever_ = false;
  std::deque<Diagnostic> recent_diagnostics_;
  std::vector<UpdateOutcome> updates_;

  mutable std::mutex queue_mutex_;
  std::deque<Command> queue_;
  Diagnostics queued_diagnostics_;  // from the watcher thread
  bool push_pending_ = false;

  std::unique_ptr<wire::Server> server_;
  std::int64_t last_push_ms_ = -1;
  std::int64_t start_ns_ = 0;

  std::atomic<bool> stop_watch_{false};
  std::thread watch_thread_;
};

}  // namespace lrp
