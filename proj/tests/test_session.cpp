#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/session.hpp"
#include "lrp/wire.hpp"

using namespace lrp;
namespace fs = std::filesystem;

namespace {

// Scratch directory holding a copy of a program, the 3 m wall world and an
// optional script.
struct Workspace {
  fs::path dir;

  explicit Workspace(const std::string& tag) {
    dir = fs::temp_directory_path() / ("lrp_session_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::copy_file(test::source_path("worlds/wall3m.json"), dir / "world.json");
    put("stop.lrp", test::stop_program());
    put("avoid.lrp", test::avoid_program());
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string put(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary | std::ios::trunc) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  SessionConfig config(std::int64_t ticks) const {
    SessionConfig c;
    c.program_path = path("program.lrp");
    c.world_path = path("world.json");
    c.mode = ClockMode::virtual_time;
    c.max_ticks = ticks;
    return c;
  }
};

std::vector<Json> parse_lines(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(Json::parse(line));
  return out;
}

std::vector<std::string> transition_names(const std::vector<Json>& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace) {
    if (e["kind"] == "transition") out.push_back(e["payload"]["name"]);
  }
  return out;
}

}  // namespace

TEST_CASE("script parsing") {
  auto s = parse_script("# comment\n10 load a.lrp\n\n5 reset_world  # trailing\n7 write /abs/b.lrp\n8 pause\n9 resume\n",
                        "/base");
  REQUIRE(s);
  REQUIRE(s->size() == 5);
  CHECK((*s)[0].step == 5);
  CHECK((*s)[0].action == ScriptStep::Action::reset_world);
  CHECK((*s)[1].file == "/abs/b.lrp");
  CHECK((*s)[4].file == "/base/a.lrp");
  CHECK_FALSE(parse_script("x load a", "."));
  CHECK_FALSE(parse_script("1 fly", "."));
  CHECK_FALSE(parse_script("1 load", "."));
  CHECK_FALSE(parse_script("1 pause now", "."));
  CHECK_FALSE(parse_script("-3 pause", "."));
}

TEST_CASE("command parsing") {
  CHECK(parse_command(Json{{"type", "pause"}})->kind == Command::Kind::pause);
  const auto load = parse_command(Json{{"type", "load_source"}, {"payload", {{"text", "(x)"}}}});
  REQUIRE(load);
  CHECK(load->text == "(x)");
  CHECK_FALSE(parse_command(Json{{"type", "load_source"}}));
  CHECK_FALSE(parse_command(Json{{"type", "dance"}}));
  CHECK_FALSE(parse_command(Json::array()));
}

TEST_CASE("open reports unreadable inputs") {
  Workspace ws("open");
  ws.put("program.lrp", test::stop_program());
  auto c = ws.config(10);
  c.world_path = ws.path("missing.json");
  CHECK_FALSE(Session::open(c));
  c = ws.config(10);
  c.program_path = ws.path("missing.lrp");
  CHECK_FALSE(Session::open(c));
  c = ws.config(10);
  c.max_ticks.reset();
  CHECK_FALSE(Session::open(c));
  ws.put("bad.json", "{\"segments\": [], \"pose\": {\"x\": 0}}");
  c = ws.config(10);
  c.world_path = ws.path("bad.json");
  const auto r = Session::open(c);
  REQUIRE_FALSE(r);
  CHECK(r.error().find("\"y\"") != std::string::npos);
}

TEST_CASE("snapshots: initial state, stability and the stop behavior") {
  Workspace ws("snap");
  ws.put("program.lrp", test::stop_program());
  auto s = Session::open(ws.config(400));
  REQUIRE(s);
  auto& session = **s;

  const auto first = session.snapshot();
  CHECK(first["tick"] == 0);
  CHECK(first["active"][0]["state"] == "forward");
  CHECK(first["pose"]["x"] == 0.0);
  CHECK(first["pose"]["y"] == 0.0);
  CHECK(first["scan"]["ranges"].size() == 55);
  CHECK(first["active"][0]["variables"]["min_distance"] == 0.5);
  CHECK(first["active"][0]["variables"]["robulab"] == "a RobulabBridge");
  CHECK(first["graph"]["nodes"].size() == 2);
  CHECK(first["source"] == test::stop_program());
  CHECK(session.snapshot() == first);

  CHECK(session.run() == 0);
  CHECK(session.tick() == 400);
  const auto last = session.snapshot();
  CHECK(last["active"][0]["state"] == "stop");
  CHECK(last["pose"]["collided"] == false);
}

TEST_CASE("commands: pause, resume, reset_world, load_source") {
  Workspace ws("cmd");
  ws.put("program.lrp", test::stop_program());
  auto s = Session::open(ws.config(1000));
  REQUIRE(s);
  auto& session = **s;
  for (int i = 0; i < 50; ++i) session.step();
  CHECK(session.tick() == 50);

  session.post(Command{Command::Kind::pause});
  for (int i = 0; i < 10; ++i) session.step();
  CHECK(session.tick() == 50);
  CHECK(session.paused());
  session.execute(Command{Command::Kind::resume});
  session.step();
  CHECK(session.tick() == 51);

  CHECK(session.driver().robot().x > 0.5);
  session.execute(Command{Command::Kind::reset_world});
  CHECK(session.driver().robot().x == 0.0);
  CHECK(session.snapshot()["pose"]["x"] == 0.0);

  const auto bad = session.execute(Command{Command::Kind::load_source, "(machine"});
  CHECK(bad["outcome"]["outcome"] == "rejected_parse_error");
  CHECK(session.source() == test::stop_program());
  const auto good = session.execute(Command{Command::Kind::load_source, test::avoid_program()});
  CHECK(good["outcome"]["outcome"] == "integrated");
  CHECK(session.source() == test::avoid_program());
}

TEST_CASE("a file edit and a load_source command give the same transitions") {
  Workspace ws("equiv");
  ws.put("program.lrp", test::stop_program());
  ws.put("via_write.txt", "250 write avoid.lrp\n");
  ws.put("via_load.txt", "250 load avoid.lrp\n");

  auto run = [&](const std::string& script) {
    ws.put("program.lrp", test::stop_program());
    auto c = ws.config(700);
    c.script_path = ws.path(script);
    std::ostringstream trace;
    auto s = Session::open(c, &trace);
    REQUIRE(s);
    CHECK((*s)->run() == 0);
    s->reset();
    return parse_lines(trace.str());
  };
  const auto a = run("via_write.txt");
  const auto b = run("via_load.txt");
  CHECK(transition_names(a) == transition_names(b));
  int updates = 0;
  for (const auto& e : a) {
    if (e["kind"] == "update") {
      ++updates;
      CHECK(e["payload"]["origin"] == "file");
      CHECK(e["payload"]["outcome"] == "integrated");
    }
  }
  CHECK(updates == 1);
}

TEST_CASE("repeated diagnostics are collapsed in the trace") {
  Workspace ws("dedup");
  ws.put("program.lrp", R"(
(machine M (state a) (state b) (on e a -> b t) (event e [nothing here]))
(spawn M a))");
  std::ostringstream trace;
  {
    auto s = Session::open(ws.config(1000), &trace);
    REQUIRE(s);
    (*s)->run();
  }
  int guard_records = 0;
  std::uint64_t repeats = 0;
  bool policy = false;
  for (const auto& e : parse_lines(trace.str())) {
    if (e["kind"] != "diagnostic") continue;
    if (e["payload"]["code"] == "trace-policy") policy = true;
    if (e["payload"]["code"] == "guard-error") {
      ++guard_records;
      if (e["payload"].contains("repeats")) repeats = e["payload"]["repeats"];
    }
  }
  CHECK(policy);
  CHECK(guard_records == 2);
  CHECK(repeats == 999);
}

TEST_CASE("a collision makes the exit status 2") {
  Workspace ws("collide");
  ws.put("program.lrp", R"(
(var robulab := [RobulabBridge uniqueInstance])
(machine M (state go (onentry [robulab forward: 1])))
(spawn M go))");
  auto s = Session::open(ws.config(200));
  REQUIRE(s);
  CHECK((*s)->run() == 2);
  CHECK((*s)->collided_ever());
}

TEST_CASE("an unparsable program still runs and can be fixed live") {
  Workspace ws("broken");
  ws.put("program.lrp", "(machine");
  ws.put("fix.txt", "5 load stop.lrp\n");
  auto c = ws.config(300);
  c.script_path = ws.path("fix.txt");
  auto s = Session::open(c);
  REQUIRE(s);
  CHECK((*s)->run() == 0);
  CHECK((*s)->snapshot()["active"][0]["state"] == "stop");
}

TEST_CASE("wire framing round trip and errors") {
  const Json msg = wire::make_message("snapshot", Json{{"tick", 3}, {"s", "é"}});
  const std::string frame = wire::encode_frame(msg);
  CHECK(static_cast<unsigned char>(frame[0]) == 0);
  CHECK(frame.size() == 4 + msg.dump().size());

  wire::FrameDecoder d;
  d.feed(frame.substr(0, 3));
  CHECK_FALSE(d.next());
  d.feed(frame.substr(3, 5));
  CHECK_FALSE(d.next());
  d.feed(frame.substr(8) + frame);
  CHECK(d.next() == msg);
  CHECK(d.next() == msg);
  CHECK_FALSE(d.next());

  d.feed(std::string("\x00\x00\x00\x02{x", 6));
  CHECK_THROWS(d.next());
  d.feed(std::string("\x7f\xff\xff\xff", 4));
  CHECK_THROWS(d.next());
}

TEST_CASE("socket server: snapshots pushed, commands acknowledged") {
  Workspace ws("serve");
  ws.put("program.lrp", test::stop_program());
  auto c = ws.config(100000);
  c.serve_port = 0;
  auto s = Session::open(c);
  REQUIRE(s);
  auto& session = **s;
  REQUIRE(session.server_port());
  wire::Client client("127.0.0.1", *session.server_port());

  auto pump_until = [&](auto pred) -> std::optional<Json> {
    for (int i = 0; i < 200; ++i) {
      session.step();
      while (auto m = client.receive(5)) {
        if (pred(*m)) return m;
      }
    }
    return std::nullopt;
  };

  const auto snap = pump_until([](const Json& m) { return m["type"] == "snapshot"; });
  REQUIRE(snap);
  CHECK((*snap)["payload"].contains("active"));

  client.send(wire::make_message("load_source", Json{{"text", test::avoid_program()}}));
  const auto ack = pump_until([](const Json& m) { return m["type"] == "ack"; });
  REQUIRE(ack);
  CHECK((*ack)["payload"]["command"] == "load_source");
  CHECK((*ack)["payload"]["outcome"]["outcome"] == "integrated");

  client.send(wire::make_message("dance", Json::object()));
  const auto nack = pump_until([](const Json& m) { return m["type"] == "ack"; });
  REQUIRE(nack);
  CHECK((*nack)["payload"]["ok"] == false);

  client.send(wire::make_message("pause", Json::object()));
  pump_until([](const Json& m) { return m["type"] == "ack"; });
  const auto t = session.tick();
  session.step();
  CHECK(session.tick() == t);
}

#ifdef LRP_CLI_PATH
TEST_CASE("command line exit codes") {
  Workspace ws("cli");
  ws.put("program.lrp", test::stop_program());
  const std::string cli = LRP_CLI_PATH;
  const auto run = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string base = cli + " run " + ws.path("program.lrp");
  CHECK(run(base + " --world " + ws.path("world.json") + " --virtual --ticks 300 --trace " + ws.path("t.jsonl")) == 0);
  CHECK(fs::file_size(ws.path("t.jsonl")) > 0);
  CHECK(run(base + " --world " + ws.path("nope.json") + " --virtual --ticks 10") == 1);
  CHECK(run(base + " --world " + ws.path("world.json") + " --virtual") != 0);  // --virtual needs --ticks
  CHECK(run(cli + " run " + ws.path("nope.lrp") + " --world " + ws.path("world.json") + " --virtual --ticks 5") == 1);
  CHECK(run(base + " --world " + ws.path("world.json") + " --tick-ms 5 --ticks 3") == 0);  // wall clock
}
#endif
