#include "lrp/live_update.hpp"

#include <fstream>
#include <sstream>

namespace lrp {

UpdateOutcome apply_source(Interpreter& interp, std::string_view source) {
  auto parsed = parse_program(source);
  if (!parsed) {
    UpdateOutcome out;
    out.kind = UpdateKind::rejected_parse_error;
    const auto& f = parsed.error();
    out.diagnostics.push_back(
        Diagnostic{Severity::error, "parse-error", "update rejected: " + f.message, "", f.line, f.column});
    return out;
  }
  return interp.integrate(std::make_shared<const ProgramAST>(std::move(parsed.value())));
}

FileWatcher::FileWatcher(std::string path, std::int64_t debounce_ms)
    : path_(std::move(path)), debounce_ms_(debounce_ms) {}

std::optional<std::string> FileWatcher::read() const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return std::move(ss).str();
}

void FileWatcher::prime() {
  if (auto text = read()) applied_digest_ = content_digest(*text);
  pending_digest_.reset();
}

std::optional<FileWatcher::Change> FileWatcher::poll(std::int64_t now_ms) {
  auto text = read();
  if (!text) {
    if (!read_failing_) {
      diagnostics_.push_back(
          Diagnostic{Severity::warning, "watch-unreadable", "cannot read " + path_ + "; keeping the running program",
                     path_, 0, 0});
    }
    read_failing_ = true;
    return std::nullopt;
  }
  read_failing_ = false;

  const auto digest = content_digest(*text);
  if (digest == applied_digest_) {
    pending_digest_.reset();
    return std::nullopt;
  }
  if (!pending_digest_ || *pending_digest_ != digest) {
    pending_digest_ = digest;
    pending_contents_ = std::move(*text);
    pending_since_ = now_ms;
    return std::nullopt;
  }
  if (now_ms - pending_since_ < debounce_ms_) return std::nullopt;

  applied_digest_ = digest;
  pending_digest_.reset();
  return Change{std::move(pending_contents_)};
}

Diagnostics FileWatcher::take_diagnostics() { return std::exchange(diagnostics_, {}); }

}  // namespace lrp
