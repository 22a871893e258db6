#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lrp/expected.hpp"
#include "lrp/expr.hpp"

namespace lrp {

class HostObject;

struct Nil {
  bool operator==(const Nil&) const = default;
};

/// Runtime value of an action block. Numbers are always finite.
struct Value {
  std::variant<Nil, double, bool, std::shared_ptr<HostObject>> data;

  Value() = default;
  Value(double d) : data(d) {}
  Value(bool b) : data(b) {}
  Value(std::shared_ptr<HostObject> h) : data(std::move(h)) {}

  bool is_nil() const noexcept { return std::holds_alternative<Nil>(data); }
  bool is_number() const noexcept { return std::holds_alternative<double>(data); }
  bool is_bool() const noexcept { return std::holds_alternative<bool>(data); }
  bool is_host() const noexcept {
    return std::holds_alternative<std::shared_ptr<HostObject>>(data);
  }
  double number() const { return std::get<double>(data); }
  bool boolean() const { return std::get<bool>(data); }
  const std::shared_ptr<HostObject>& host() const {
    return std::get<std::shared_ptr<HostObject>>(data);
  }

  /// Host references compare by identity.
  bool operator==(const Value&) const = default;
};

std::string describe(const Value& v);

enum class EvalErrorKind { unknown_variable, unknown_selector, wrong_arity, type_mismatch, host_failure };

std::string_view to_string(EvalErrorKind k) noexcept;

struct EvalError {
  EvalErrorKind kind = EvalErrorKind::host_failure;
  std::string message;
};

using EvalResult = Expected<Value, EvalError>;

/// An object reachable from action blocks through message sends.
class HostObject {
 public:
  virtual ~HostObject() = default;
  virtual std::string_view class_name() const = 0;
  /// `args.size()` always equals keyword_arity(selector).
  virtual EvalResult send(std::string_view selector, std::span<const Value> args) = 0;
};

/// Class-side object answering `uniqueInstance` with a lazily created singleton.
class SingletonClass final : public HostObject {
 public:
  using Factory = std::function<std::shared_ptr<HostObject>()>;
  SingletonClass(std::string name, Factory factory)
      : name_(std::move(name)), factory_(std::move(factory)) {}

  std::string_view class_name() const override { return name_; }
  EvalResult send(std::string_view selector, std::span<const Value> args) override;

 private:
  std::string name_;
  Factory factory_;
  std::shared_ptr<HostObject> instance_;
};

/// Global names visible to every block after all variable frames.
class HostRegistry {
 public:
  void add(std::string name, std::shared_ptr<HostObject> object);
  void add_singleton(std::string name, SingletonClass::Factory factory);
  std::shared_ptr<HostObject> find(std::string_view name) const;

 private:
  std::map<std::string, std::shared_ptr<HostObject>, std::less<>> objects_;
};

/// One lexical scope of variable bindings; insertion order is preserved.
class Frame {
 public:
  explicit Frame(std::shared_ptr<const Frame> parent = nullptr) : parent_(std::move(parent)) {}

  const Value* find_local(std::string_view name) const;
  const Value* lookup(std::string_view name) const;
  void set(std::string name, Value v);
  bool erase(std::string_view name);
  void clear() noexcept { bindings_.clear(); }
  const std::vector<std::pair<std::string, Value>>& bindings() const noexcept { return bindings_; }
  const std::shared_ptr<const Frame>& parent() const noexcept { return parent_; }

  /// Every visible name, innermost binding winning, outermost scope first.
  std::vector<std::pair<std::string, Value>> visible() const;

 private:
  std::shared_ptr<const Frame> parent_;
  std::vector<std::pair<std::string, Value>> bindings_;
};

struct Environment {
  const Frame* frame = nullptr;
  const HostRegistry* hosts = nullptr;

  std::optional<Value> lookup(std::string_view name) const;
};

EvalResult eval(const Expr& expr, const Environment& env);

}  // namespace lrp
