#include "lrp/trace.hpp"

#include "lrp/eval.hpp"

namespace lrp {

Json to_json(const Diagnostic& d) {
  Json j;
  j["severity"] = std::string(to_string(d.severity));
  j["code"] = d.code;
  j["message"] = d.message;
  j["where"] = d.where;
  j["line"] = d.line;
  j["column"] = d.column;
  return j;
}

Json to_json(const UpdateOutcome& u) {
  Json j;
  j["outcome"] = std::string(to_string(u.kind));
  j["preserved"] = u.preserved_states;
  j["respawned"] = u.respawned;
  j["idled"] = u.idled;
  Json diags = Json::array();
  for (const auto& d : u.diagnostics) diags.push_back(to_json(d));
  j["diagnostics"] = std::move(diags);
  return j;
}

Json to_json(const Value& v) {
  if (v.is_number()) return v.number();
  if (v.is_bool()) return v.boolean();
  if (v.is_host()) return describe(v);
  return nullptr;
}

TraceWriter::TraceWriter(std::ostream* out) : out_(out) {
  write("diagnostic", to_json(Diagnostic{Severity::info, "trace-policy",
                                         "identical diagnostics on consecutive ticks are collapsed into one record; "
                                         "a later record with \"repeats\" gives the number collapsed",
                                         "", 0, 0}));
}

TraceWriter::~TraceWriter() { finish(); }

void TraceWriter::write(std::string_view kind, Json payload) {
  ++records_;
  if (out_ == nullptr) return;
  Json line;
  line["tick"] = tick_;
  line["kind"] = kind;
  line["payload"] = std::move(payload);
  *out_ << line.dump() << '\n';
}

void TraceWriter::transition(const TransitionRecord& t) {
  write("transition", Json{{"machine", t.machine}, {"name", t.name}, {"source", t.source}, {"target", t.target}});
}

void TraceWriter::bus_event(const bus::BusEvent& e) {
  switch (e.kind) {
    case bus::BusEvent::Kind::publish:
      write("publish", Json{{"node", e.node}, {"topic", e.topic}, {"seq", e.seq}, {"delivered", e.delivered}});
      break;
    case bus::BusEvent::Kind::lifecycle:
      write("lifecycle", Json{{"event", "state"}, {"node", e.node}, {"state", e.detail}});
      break;
    case bus::BusEvent::Kind::remap:
      write("lifecycle", Json{{"event", "remap"}, {"node", e.node}, {"topic", e.topic}, {"detail", e.detail}});
      break;
    case bus::BusEvent::Kind::param:
      write("lifecycle", Json{{"event", "param"}, {"node", e.node}, {"name", e.detail}});
      break;
  }
}

void TraceWriter::update(const UpdateOutcome& u, std::string_view origin) {
  Json j = to_json(u);
  j["origin"] = origin;
  write("update", std::move(j));
}

void TraceWriter::diagnostic(const Diagnostic& d) {
  std::string key = std::string(to_string(d.severity)) + '\x1f' + d.code + '\x1f' + d.where + '\x1f' + d.message;
  auto it = streaks_.find(key);
  if (it != streaks_.end() && it->second.last_tick >= tick_ - 1) {
    ++it->second.repeats;
    it->second.last_tick = tick_;
    return;
  }
  if (it != streaks_.end()) {
    close_streak(it->second);
    streaks_.erase(it);
  }
  write("diagnostic", to_json(d));
  streaks_.emplace(std::move(key), Streak{d, tick_, 0});
}

void TraceWriter::close_streak(const Streak& s) {
  if (s.repeats == 0) return;
  Json j = to_json(s.first);
  j["repeats"] = s.repeats;
  write("diagnostic", std::move(j));
}

void TraceWriter::pose(const sim::RobotState& r) {
  write("pose", Json{{"x", r.x}, {"y", r.y}, {"theta", r.theta}, {"v", r.v}, {"omega", r.omega},
                     {"collided", r.collided}});
}

void TraceWriter::end_tick() {
  for (auto it = streaks_.begin(); it != streaks_.end();) {
    if (it->second.last_tick < tick_) {
      close_streak(it->second);
      it = streaks_.erase(it);
    } else {
      ++it;
    }
  }
}

void TraceWriter::finish() {
  if (finished_) return;
  finished_ = true;
  for (const auto& [key, s] : streaks_) close_streak(s);
  streaks_.clear();
  if (out_ != nullptr) out_->flush();
}

}  // namespace lrp
