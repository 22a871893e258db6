#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lrp {

enum class Severity { info, warning, error };

std::string_view to_string(Severity s) noexcept;

/// A non-fatal report. Everything that goes wrong while a program is loaded,
/// ticked, or updated ends up as one of these instead of an exception.
struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;     // stable machine-readable tag, e.g. "guard-error"
  std::string message;  // human readable
  std::string where;    // machine path or node name, may be empty
  int line = 0;         // 1-based source position, 0 when unknown
  int column = 0;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

std::string format(const Diagnostic& d);

}  // namespace lrp
