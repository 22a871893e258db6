#include "lrp/diagnostic.hpp"

namespace lrp {

std::string_view to_string(Severity s) noexcept {
  switch (s) {
    case Severity::info:
      return "info";
    case Severity::warning:
      return "warning";
    case Severity::error:
      return "error";
  }
  return "error";
}

std::string format(const Diagnostic& d) {
  std::string out{to_string(d.severity)};
  if (d.line > 0) {
    out += " " + std::to_string(d.line) + ":" + std::to_string(d.column);
  }
  if (!d.where.empty()) out += " [" + d.where + "]";
  out += " " + d.code + ": " + d.message;
  return out;
}

}  // namespace lrp
