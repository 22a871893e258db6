#include "lrp/eval.hpp"

#include <algorithm>
#include <cmath>

namespace lrp {

namespace {

EvalResult error(EvalErrorKind kind, std::string message) {
  return unexpected(EvalError{kind, std::move(message)});
}

std::string_view type_name(const Value& v) {
  if (v.is_nil()) return "nil";
  if (v.is_number()) return "Number";
  if (v.is_bool()) return "Boolean";
  return v.host()->class_name();
}

EvalResult send_builtin(const Value& receiver, std::string_view selector,
                        std::span<const Value> args) {
  if (receiver.is_number() && args.empty()) {
    if (selector == "negated") return Value(-receiver.number());
    if (selector == "abs") return Value(std::fabs(receiver.number()));
  }
  if (receiver.is_bool() && args.empty() && selector == "not") return Value(!receiver.boolean());
  return error(EvalErrorKind::unknown_selector,
               std::string(type_name(receiver)) + " does not understand #" + std::string(selector));
}

EvalResult send(const Value& receiver, std::string_view selector, std::span<const Value> args) {
  if (!receiver.is_host()) return send_builtin(receiver, selector, args);
  EvalResult result = [&]() -> EvalResult {
    try {
      return receiver.host()->send(selector, args);
    } catch (const std::exception& e) {
      return error(EvalErrorKind::host_failure,
                   std::string(receiver.host()->class_name()) + "#" + std::string(selector) +
                       " failed: " + e.what());
    }
  }();
  if (result && result->is_number() && !std::isfinite(result->number())) {
    return error(EvalErrorKind::type_mismatch, "non-finite number returned by #" + std::string(selector));
  }
  return result;
}

}  // namespace

std::string describe(const Value& v) {
  if (v.is_nil()) return "nil";
  if (v.is_number()) return format_number(v.number());
  if (v.is_bool()) return v.boolean() ? "true" : "false";
  return "a " + std::string(v.host()->class_name());
}

std::string_view to_string(EvalErrorKind k) noexcept {
  switch (k) {
    case EvalErrorKind::unknown_variable:
      return "unknown variable";
    case EvalErrorKind::unknown_selector:
      return "unknown selector";
    case EvalErrorKind::wrong_arity:
      return "wrong arity";
    case EvalErrorKind::type_mismatch:
      return "type mismatch";
    case EvalErrorKind::host_failure:
      return "host failure";
  }
  return "host failure";
}

EvalResult SingletonClass::send(std::string_view selector, std::span<const Value> args) {
  if (selector == "uniqueInstance" && args.empty()) {
    if (!instance_) instance_ = factory_();
    return Value(instance_);
  }
  return error(EvalErrorKind::unknown_selector,
               name_ + " class does not understand #" + std::string(selector));
}

void HostRegistry::add(std::string name, std::shared_ptr<HostObject> object) {
  objects_.insert_or_assign(std::move(name), std::move(object));
}

void HostRegistry::add_singleton(std::string name, SingletonClass::Factory factory) {
  auto cls = std::make_shared<SingletonClass>(name, std::move(factory));
  add(std::move(name), std::move(cls));
}

std::shared_ptr<HostObject> HostRegistry::find(std::string_view name) const {
  const auto it = objects_.find(name);
  return it == objects_.end() ? nullptr : it->second;
}

const Value* Frame::find_local(std::string_view name) const {
  for (const auto& [n, v] : bindings_) {
    if (n == name) return &v;
  }
  return nullptr;
}

const Value* Frame::lookup(std::string_view name) const {
  for (const Frame* f = this; f != nullptr; f = f->parent_.get()) {
    if (const Value* v = f->find_local(name)) return v;
  }
  return nullptr;
}

void Frame::set(std::string name, Value v) {
  for (auto& [n, existing] : bindings_) {
    if (n == name) {
      existing = std::move(v);
      return;
    }
  }
  bindings_.emplace_back(std::move(name), std::move(v));
}

bool Frame::erase(std::string_view name) {
  const auto it = std::find_if(bindings_.begin(), bindings_.end(),
                               [name](const auto& b) { return b.first == name; });
  if (it == bindings_.end()) return false;
  bindings_.erase(it);
  return true;
}

std::vector<std::pair<std::string, Value>> Frame::visible() const {
  std::vector<const Frame*> chain;
  for (const Frame* f = this; f != nullptr; f = f->parent_.get()) chain.push_back(f);
  std::vector<std::pair<std::string, Value>> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const auto& [name, value] : (*it)->bindings_) {
      auto existing = std::find_if(out.begin(), out.end(),
                                   [&name](const auto& b) { return b.first == name; });
      if (existing != out.end()) {
        existing->second = value;
      } else {
        out.emplace_back(name, value);
      }
    }
  }
  return out;
}

std::optional<Value> Environment::lookup(std::string_view name) const {
  if (frame != nullptr) {
    if (const Value* v = frame->lookup(name)) return *v;
  }
  if (hosts != nullptr) {
    if (auto h = hosts->find(name)) return Value(std::move(h));
  }
  return std::nullopt;
}

EvalResult eval(const Expr& expr, const Environment& env) {
  return std::visit(
      [&env](const auto& n) -> EvalResult {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          return Value(n.value);
        } else if constexpr (std::is_same_v<T, BooleanLiteral>) {
          return Value(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          if (auto v = env.lookup(n.name)) return *v;
          return error(EvalErrorKind::unknown_variable, "unknown variable " + n.name);
        } else if constexpr (std::is_same_v<T, UnaryMessage>) {
          auto receiver = eval(*n.receiver, env);
          if (!receiver) return receiver;
          return send(*receiver, n.selector, {});
        } else if constexpr (std::is_same_v<T, KeywordMessage>) {
          if (n.args.size() != keyword_arity(n.selector)) {
            return error(EvalErrorKind::wrong_arity, "wrong number of arguments for #" + n.selector);
          }
          auto receiver = eval(*n.receiver, env);
          if (!receiver) return receiver;
          std::vector<Value> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) {
            auto v = eval(*a, env);
            if (!v) return v;
            args.push_back(std::move(v.value()));
          }
          return send(*receiver, n.selector, args);
        } else {
          return eval(*n.inner, env);
        }
      },
      expr.node);
}

}  // namespace lrp
