#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lrp/diagnostic.hpp"
#include "lrp/interpreter.hpp"

namespace lrp {

/// Parses `source` and hot-swaps it into `interp`. A parse failure leaves the
/// running program untouched and reports the failure position.
UpdateOutcome apply_source(Interpreter& interp, std::string_view source);

/// Polls one file for content changes. A change is reported once its content
/// has stayed the same for the debounce window, so a burst of writes yields a
/// single update.
class FileWatcher {
 public:
  struct Change {
    std::string contents;
  };

  explicit FileWatcher(std::string path, std::int64_t debounce_ms = 100);

  /// Takes the current content as the baseline without reporting it.
  void prime();

  /// `now_ms` is any monotonic clock; virtual-time sessions pass tick * tick_ms.
  std::optional<Change> poll(std::int64_t now_ms);

  /// Read failures since the last call (one per failure streak).
  Diagnostics take_diagnostics();

  const std::string& path() const noexcept { return path_; }

 private:
  std::optional<std::string> read() const;

  std::string path_;
  std::int64_t debounce_ms_;
  std::uint64_t applied_digest_ = 0;
  std::optional<std::uint64_t> pending_digest_;
  std::string pending_contents_;
  std::int64_t pending_since_ = 0;
  bool read_failing_ = false;
  Diagnostics diagnostics_;
};

}  // namespace lrp
