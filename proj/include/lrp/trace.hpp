#pragma once

// JSON-lines session trace: {"tick": N, "kind": K, "payload": {...}} with a
// fixed field order. Nothing wall-clock dependent is recorded, so virtual-time
// runs are byte-for-byte reproducible.
//
// Diagnostic deduplication: a diagnostic identical to one already recorded
// (same severity, code, location and message) on the same or the previous
// tick extends that streak instead of producing a new record. When a streak
// ends, or the trace is closed, one more record with "repeats": N accounts
// for the collapsed occurrences. The policy is also stated in a
// "trace-policy" record at tick 0.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "lrp/diagnostic.hpp"
#include "lrp/interpreter.hpp"
#include "lrp/pubsub.hpp"
#include "lrp/sim.hpp"

namespace lrp {

using Json = nlohmann::ordered_json;

Json to_json(const Diagnostic& d);
Json to_json(const UpdateOutcome& u);
Json to_json(const Value& v);

class TraceWriter {
 public:
  /// `out` may be null; records are then counted but not written.
  explicit TraceWriter(std::ostream* out);
  ~TraceWriter();

  void set_tick(std::int64_t tick) noexcept { tick_ = tick; }

  void transition(const TransitionRecord& t);
  void bus_event(const bus::BusEvent& e);
  void update(const UpdateOutcome& u, std::string_view origin);
  void diagnostic(const Diagnostic& d);
  void pose(const sim::RobotState& r);

  /// Closes diagnostic streaks not extended during the current tick.
  void end_tick();
  /// Closes every open streak and flushes.
  void finish();

  std::uint64_t records() const noexcept { return records_; }

 private:
  struct Streak {
    Diagnostic first;
    std::int64_t last_tick = 0;
    std::uint64_t repeats = 0;
  };

  void write(std::string_view kind, Json payload);
  void close_streak(const Streak& s);

  std::ostream* out_;
  std::int64_t tick_ = 0;
  std::uint64_t records_ = 0;
  std::map<std::string, Streak> streaks_;
  bool finished_ = false;
};

}  // namespace lrp
