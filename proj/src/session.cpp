#include "lrp/session.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lrp/wire.hpp"

namespace lrp {

namespace {

constexpr std::size_t kRecentDiagnostics = 50;
constexpr std::int64_t kSnapshotPeriodMs = 100;
constexpr std::size_t kScanDecimation = 5;

std::optional<std::string> read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::int64_t steady_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int severity_rank(Severity s) {
  switch (s) {
    case Severity::info:
      return 0;
    case Severity::warning:
      return 1;
    case Severity::error:
      return 2;
  }
  return 2;
}

}  // namespace

std::string_view to_string(Command::Kind k) noexcept {
  switch (k) {
    case Command::Kind::pause:
      return "pause";
    case Command::Kind::resume:
      return "resume";
    case Command::Kind::reset_world:
      return "reset_world";
    case Command::Kind::load_source:
      return "load_source";
    case Command::Kind::snapshot:
      return "snapshot";
  }
  return "pause";
}

Expected<Command, std::string> parse_command(const Json& message) {
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
    return unexpected(std::string("message needs a string \"type\""));
  }
  const std::string type = message["type"].get<std::string>();
  Command c;
  if (type == "pause") {
    c.kind = Command::Kind::pause;
  } else if (type == "resume") {
    c.kind = Command::Kind::resume;
  } else if (type == "reset_world") {
    c.kind = Command::Kind::reset_world;
  } else if (type == "snapshot") {
    c.kind = Command::Kind::snapshot;
  } else if (type == "load_source") {
    const auto payload = message.find("payload");
    if (payload == message.end() || !payload->is_object() || !payload->contains("text") ||
        !(*payload)["text"].is_string()) {
      return unexpected(std::string("load_source needs payload.text"));
    }
    c.kind = Command::Kind::load_source;
    c.text = (*payload)["text"].get<std::string>();
  } else {
    return unexpected("unknown command " + type);
  }
  return c;
}

Expected<std::vector<ScriptStep>, std::string> parse_script(std::string_view text, const std::string& base_dir) {
  std::vector<ScriptStep> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string step_text, action, file, extra;
    if (!(fields >> step_text)) continue;
    const auto where = "script line " + std::to_string(line_no) + ": ";
    ScriptStep s;
    try {
      std::size_t used = 0;
      s.step = std::stoll(step_text, &used);
      if (used != step_text.size() || s.step < 0) throw std::invalid_argument("step");
    } catch (const std::exception&) {
      return unexpected(where + "bad step \"" + step_text + "\"");
    }
    if (!(fields >> action)) return unexpected(where + "missing action");
    fields >> file >> extra;
    if (!extra.empty()) return unexpected(where + "too many fields");
    if (action == "load" || action == "write") {
      s.action = action == "load" ? ScriptStep::Action::load : ScriptStep::Action::write;
      if (file.empty()) return unexpected(where + action + " needs a file");
      std::filesystem::path p(file);
      s.file = p.is_absolute() ? file : (std::filesystem::path(base_dir) / p).string();
    } else {
      if (action == "reset_world") {
        s.action = ScriptStep::Action::reset_world;
      } else if (action == "pause") {
        s.action = ScriptStep::Action::pause;
      } else if (action == "resume") {
        s.action = ScriptStep::Action::resume;
      } else {
        return unexpected(where + "unknown action \"" + action + "\"");
      }
      if (!file.empty()) return unexpected(where + action + " takes no file");
    }
    steps.push_back(std::move(s));
  }
  std::stable_sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
  return steps;
}

Expected<std::unique_ptr<Session>, std::string> Session::open(SessionConfig config, std::ostream* trace_sink) {
  if (config.mode == ClockMode::virtual_time && !config.max_ticks) {
    return unexpected(std::string("virtual time needs a tick limit"));
  }
  if (config.tick_ms <= 0) return unexpected(std::string("tick length must be positive"));
  auto source = read_text(config.program_path);
  if (!source) return unexpected("cannot read program file " + config.program_path);
  auto world = sim::load_world(config.world_path);
  if (!world) return unexpected(world.error());
  std::vector<ScriptStep> script;
  if (config.script_path) {
    const auto text = read_text(*config.script_path);
    if (!text) return unexpected("cannot read script file " + *config.script_path);
    auto parsed = parse_script(*text, std::filesystem::path(*config.script_path).parent_path().string());
    if (!parsed) return unexpected(*config.script_path + ": " + parsed.error());
    script = std::move(parsed.value());
  }
  std::unique_ptr<std::ostream> file;
  if (config.trace_path && trace_sink == nullptr) {
    file = std::make_unique<std::ofstream>(*config.trace_path, std::ios::binary | std::ios::trunc);
    if (!*file) return unexpected("cannot write trace file " + *config.trace_path);
    trace_sink = file.get();
  }
  try {
    std::unique_ptr<Session> s(
        new Session(std::move(config), std::move(world.value()), std::move(*source), std::move(script), trace_sink));
    s->trace_file_ = std::move(file);
    return s;
  } catch (const std::exception& e) {
    return unexpected(std::string(e.what()));
  }
}

Session::Session(SessionConfig config, sim::WorldSpec world, std::string source, std::vector<ScriptStep> script,
                 std::ostream* trace_sink)
    : config_(std::move(config)), source_(std::move(source)), script_(std::move(script)), start_ns_(steady_ns()) {
  trace_ = std::make_unique<TraceWriter>(trace_sink);
  bus_ = std::make_unique<bus::Bus>();
  bus_->set_trace_hook([this](const bus::BusEvent& e) { trace_->bus_event(e); });

  driver_ = std::make_unique<sim::Driver>(*bus_, std::move(world.world), world.initial,
                                          static_cast<double>(config_.tick_ms) / 1000.0);
  driver_->set_diagnostic_sink([this](const Diagnostic& d) { diagnose(d); });

  hosts_.add_singleton("RobulabBridge", [this]() -> std::shared_ptr<HostObject> {
    auto b = std::make_shared<RobulabBridge>(*bus_);
    b->set_diagnostic_sink([this](const Diagnostic& d) { diagnose(d); });
    bridge_ = b;
    return b;
  });

  interpreter_ = std::make_unique<Interpreter>(&hosts_, InterpreterOptions{config_.tick_ms, 100});
  interpreter_->set_hooks({[this](const TransitionRecord& t) {
                             trace_->transition(t);
                             push_pending_ = true;
                           },
                           [this](const Diagnostic& d) { diagnose(d); }});

  auto parsed = parse_program(source_);
  if (parsed) {
    for (const auto& d : interpreter_->load(std::make_shared<const ProgramAST>(std::move(parsed.value())))) diagnose(d);
  } else {
    const auto& f = parsed.error();
    diagnose(Diagnostic{Severity::error, "parse-error", "program not loaded: " + f.message, config_.program_path,
                        f.line, f.column});
  }
  driver_->publish_state();
  trace_->pose(driver_->robot());

  if (config_.watch_program) {
    watcher_ = std::make_unique<FileWatcher>(config_.program_path);
    watcher_->prime();
  }
  if (config_.serve_port) {
    server_ = std::make_unique<wire::Server>(*config_.serve_port, [this](const Json& message) {
      auto cmd = parse_command(message);
      if (cmd) {
        post(std::move(cmd.value()));
      } else {
        server_->send(wire::make_message("ack", Json{{"command", message.value("type", "")}, {"ok", false},
                                                     {"error", cmd.error()}}));
      }
    });
  }
}

Session::~Session() {
  stop_watch_ = true;
  if (watch_thread_.joinable()) watch_thread_.join();
  if (server_) server_->stop();
  trace_->finish();
}

std::optional<std::uint16_t> Session::server_port() const {
  if (!server_) return std::nullopt;
  return server_->port();
}

std::int64_t Session::clock_ms() const {
  if (config_.mode == ClockMode::virtual_time) return clock_step_ * config_.tick_ms;
  return (steady_ns() - start_ns_) / 1'000'000;
}

void Session::diagnose(const Diagnostic& d) {
  trace_->diagnostic(d);
  recent_diagnostics_.push_back(d);
  if (recent_diagnostics_.size() > kRecentDiagnostics) recent_diagnostics_.pop_front();
  if (config_.log_threshold && severity_rank(d.severity) >= severity_rank(*config_.log_threshold)) {
    std::cerr << "[tick " << tick_ << "] " << format(d) << '\n';
  }
}

void Session::post(Command command) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(std::move(command));
}

void Session::apply_update(std::string_view text, std::string_view origin) {
  auto outcome = apply_source(*interpreter_, text);
  if (outcome.kind != UpdateKind::rejected_parse_error) source_ = std::string(text);
  trace_->update(outcome, origin);
  for (const auto& d : outcome.diagnostics) diagnose(d);
  updates_.push_back(std::move(outcome));
  push_pending_ = true;
}

Json Session::execute(const Command& command) {
  Json ack{{"command", std::string(to_string(command.kind))}, {"ok", true}};
  switch (command.kind) {
    case Command::Kind::pause:
      paused_ = true;
      break;
    case Command::Kind::resume:
      paused_ = false;
      break;
    case Command::Kind::reset_world:
      driver_->reset();
      driver_->publish_state();
      trace_->pose(driver_->robot());
      push_pending_ = true;
      break;
    case Command::Kind::load_source:
      apply_update(command.text, command.origin);
      ack["outcome"] = to_json(updates_.back());
      break;
    case Command::Kind::snapshot:
      push_pending_ = true;
      break;
  }
  if (server_ && command.origin == "command") server_->send(wire::make_message("ack", ack));
  return ack;
}

void Session::run_script_step(const ScriptStep& s) {
  switch (s.action) {
    case ScriptStep::Action::load:
    case ScriptStep::Action::write: {
      const auto text = read_text(s.file);
      if (!text) {
        diagnose(Diagnostic{Severity::error, "script", "cannot read " + s.file, "", 0, 0});
        return;
      }
      if (s.action == ScriptStep::Action::load) {
        execute(Command{Command::Kind::load_source, *text, "script"});
      } else {
        std::ofstream out(config_.program_path, std::ios::binary | std::ios::trunc);
        out << *text;
        if (!out) diagnose(Diagnostic{Severity::error, "script", "cannot write " + config_.program_path, "", 0, 0});
      }
      return;
    }
    case ScriptStep::Action::reset_world:
      execute(Command{Command::Kind::reset_world, {}, "script"});
      return;
    case ScriptStep::Action::pause:
      execute(Command{Command::Kind::pause, {}, "script"});
      return;
    case ScriptStep::Action::resume:
      execute(Command{Command::Kind::resume, {}, "script"});
      return;
  }
}

void Session::step() {
  ++clock_step_;
  trace_->set_tick(tick_);

  while (script_next_ < script_.size() && script_[script_next_].step <= clock_step_) {
    run_script_step(script_[script_next_++]);
  }

  std::deque<Command> commands;
  Diagnostics watcher_diags;
  {
    std::lock_guard lock(queue_mutex_);
    commands.swap(queue_);
    watcher_diags.swap(queued_diagnostics_);
  }
  for (const auto& d : watcher_diags) diagnose(d);
  for (const auto& c : commands) execute(c);

  if (watcher_ && !watch_thread_.joinable()) {
    if (auto change = watcher_->poll(clock_ms())) apply_update(change->contents, "file");
    for (const auto& d : watcher_->take_diagnostics()) diagnose(d);
  }

  if (!paused_) {
    ++tick_;
    trace_->set_tick(tick_);
    interpreter_->tick();
    const bool was_collided = driver_->robot().collided;
    driver_->tick();
    const auto& robot = driver_->robot();
    trace_->pose(robot);
    if (robot.collided && !was_collided) {
      collided_ever_ = true;
      diagnose(Diagnostic{Severity::error, "collision",
                          "robot touched an obstacle at (" + format_number(robot.x) + ", " + format_number(robot.y) + ")",
                          "driver", 0, 0});
      push_pending_ = true;
    }
    trace_->end_tick();
  }
  maybe_push_snapshot(false);
}

void Session::maybe_push_snapshot(bool force) {
  if (!server_) {
    push_pending_ = false;
    return;
  }
  const auto now = clock_ms();
  if (force || push_pending_ || last_push_ms_ < 0 || now - last_push_ms_ >= kSnapshotPeriodMs) {
    server_->send(wire::make_message("snapshot", snapshot()));
    last_push_ms_ = now;
    push_pending_ = false;
  }
}

int Session::run(const std::atomic<bool>* interrupt) {
  auto interrupted = [interrupt] { return interrupt != nullptr && interrupt->load(); };

  if (config_.mode == ClockMode::virtual_time) {
    while (!interrupted() && tick_ < *config_.max_ticks) {
      if (paused_ && script_next_ == script_.size()) {
        std::lock_guard lock(queue_mutex_);
        if (queue_.empty()) break;
      }
      step();
    }
  } else {
    if (watcher_) {
      watch_thread_ = std::thread([this] {
        while (!stop_watch_) {
          auto change = watcher_->poll(clock_ms());
          auto diags = watcher_->take_diagnostics();
          {
            std::lock_guard lock(queue_mutex_);
            if (change) queue_.push_back(Command{Command::Kind::load_source, std::move(change->contents), "file"});
            for (auto& d : diags) queued_diagnostics_.push_back(std::move(d));
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
      });
    }
    const auto period = std::chrono::milliseconds(config_.tick_ms);
    auto deadline = std::chrono::steady_clock::now();
    while (!interrupted() && !(config_.max_ticks && tick_ >= *config_.max_ticks)) {
      step();
      deadline += period;
      const auto now = std::chrono::steady_clock::now();
      if (now > deadline + period) deadline = now;  // fell behind; do not burst
      std::this_thread::sleep_until(deadline);
    }
    stop_watch_ = true;
    if (watch_thread_.joinable()) watch_thread_.join();
  }
  trace_->finish();
  return collided_ever_ ? 2 : 0;
}

Json Session::snapshot() const {
  Json j;
  j["tick"] = tick_;
  j["paused"] = paused_;

  Json machines = Json::array();
  for (const auto& inst : interpreter_->instances()) {
    machines.push_back(Json{{"machine", inst->path()},
                            {"status", inst->status == MachineStatus::running ? "running" : "idle_error"},
                            {"active_path", inst->active_path()}});
  }
  j["machines"] = std::move(machines);

  Json active = Json::array();
  for (const auto& e : interpreter_->active_configuration()) {
    Json vars = Json::object();
    for (const auto& [name, value] : e.variables) vars[name] = to_json(value);
    active.push_back(Json{{"machine", e.machine}, {"state", e.state}, {"variables", std::move(vars)}});
  }
  j["active"] = std::move(active);

  const auto& r = driver_->robot();
  j["pose"] = Json{{"x", r.x}, {"y", r.y}, {"theta", r.theta}, {"v", r.v}, {"omega", r.omega}, {"radius", r.radius},
                   {"collided", r.collided}};
  j["collided_ever"] = collided_ever_;

  const auto& scan = driver_->last_scan();
  Json ranges = Json::array();
  for (std::size_t k = 0; k < scan.ranges.size(); k += kScanDecimation) ranges.push_back(scan.ranges[k]);
  j["scan"] = Json{{"angle_min", scan.angle_min},
                   {"angle_increment", scan.angle_increment * static_cast<double>(kScanDecimation)},
                   {"range_max", scan.range_max},
                   {"ranges", std::move(ranges)}};

  Json segments = Json::array();
  for (const auto& s : driver_->world().obstacles()) segments.push_back(Json{s.a.x, s.a.y, s.b.x, s.b.y});
  j["world"] = Json{{"segments", std::move(segments)}};

  const auto graph = bus_->graph();
  Json nodes = Json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back(Json{{"name", n.name},
                         {"lifecycle", std::string(bus::to_string(n.lifecycle))},
                         {"subscribed", n.subscribed},
                         {"published", n.published}});
  }
  Json topics = Json::array();
  for (const auto& t : graph.topics) {
    topics.push_back(Json{{"name", t.name}, {"schema", t.schema}, {"last_seq", t.last_seq}});
  }
  j["graph"] = Json{{"nodes", std::move(nodes)}, {"topics", std::move(topics)}};

  Json diags = Json::array();
  for (const auto& d : recent_diagnostics_) diags.push_back(to_json(d));
  j["diagnostics"] = std::move(diags);
  j["source"] = source_;
  return j;
}

}  // namespace lrp
