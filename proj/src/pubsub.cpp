#include "lrp/pubsub.hpp"

#include <algorithm>

namespace lrp::bus {

std::string_view to_string(Lifecycle l) noexcept {
  switch (l) {
    case Lifecycle::created:
      return "created";
    case Lifecycle::running:
      return "running";
    case Lifecycle::stopped:
      return "stopped";
  }
  return "created";
}

std::optional<double> Payload::number(std::string_view field) const {
  const auto it = fields.find(std::string(field));
  if (it == fields.end() || !std::holds_alternative<double>(it->second)) return std::nullopt;
  return std::get<double>(it->second);
}

const std::vector<double>* Payload::list(std::string_view field) const {
  const auto it = fields.find(std::string(field));
  if (it == fields.end()) return nullptr;
  return std::get_if<std::vector<double>>(&it->second);
}

Bus::Bus() {
  register_schema({"cmd_vel", {{"linear", FieldKind::number}, {"angular", FieldKind::number}}});
  register_schema({"pose", {{"x", FieldKind::number}, {"y", FieldKind::number}, {"theta", FieldKind::number}}});
  register_schema({"laser",
                   {{"angle_min", FieldKind::number},
                    {"angle_increment", FieldKind::number},
                    {"range_max", FieldKind::number},
                    {"ranges", FieldKind::number_list}}});
}

void Bus::register_schema(Schema schema) {
  std::lock_guard lock(mutex_);
  auto name = schema.name;
  schemas_.insert_or_assign(std::move(name), std::move(schema));
}

Bus::NodeRecord& Bus::record(NodeId node) {
  if (node.value >= nodes_.size()) throw BusError("unknown node id " + std::to_string(node.value));
  return nodes_[node.value];
}

const Bus::NodeRecord& Bus::record(NodeId node) const {
  if (node.value >= nodes_.size()) throw BusError("unknown node id " + std::to_string(node.value));
  return nodes_[node.value];
}

void Bus::emit(BusEvent event) const {
  if (trace_hook_) trace_hook_(event);
}

NodeId Bus::create_node(std::string name) {
  std::lock_guard lock(mutex_);
  if (find_node(name)) throw BusError("node " + name + " already exists");
  nodes_.push_back(NodeRecord{name, Lifecycle::created, {}, {}});
  const NodeId id{nodes_.size() - 1};
  emit({BusEvent::Kind::lifecycle, std::move(name), {}, "created", 0, 0});
  return id;
}

std::optional<NodeId> Bus::find_node(std::string_view name) const {
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return NodeId{i};
  }
  return std::nullopt;
}

std::string Bus::node_name(NodeId node) const {
  std::lock_guard lock(mutex_);
  return record(node).name;
}

Lifecycle Bus::lifecycle(NodeId node) const {
  std::lock_guard lock(mutex_);
  return record(node).lifecycle;
}

void Bus::set_lifecycle(NodeId node, Lifecycle next) {
  auto& rec = record(node);
  if (rec.lifecycle == next) return;
  rec.lifecycle = next;
  emit({BusEvent::Kind::lifecycle, rec.name, {}, std::string(to_string(next)), 0, 0});
}

void Bus::start(NodeId node) {
  std::lock_guard lock(mutex_);
  // Subscriptions stay attached to the record, so marking the node running
  // is all it takes for delivery to resume.
  set_lifecycle(node, Lifecycle::running);
}

void Bus::stop(NodeId node) {
  std::lock_guard lock(mutex_);
  if (record(node).lifecycle == Lifecycle::created) return;
  set_lifecycle(node, Lifecycle::stopped);
}

void Bus::start_all(std::span<const NodeId> nodes) {
  for (const NodeId n : nodes) start(n);
}

void Bus::stop_all(std::span<const NodeId> nodes) {
  for (const NodeId n : nodes) stop(n);
}

void Bus::check_payload(const Payload& payload) const {
  const auto it = schemas_.find(payload.schema);
  if (it == schemas_.end()) throw BusError("unknown schema " + payload.schema);
  const Schema& schema = it->second;
  if (payload.fields.size() != schema.fields.size()) {
    throw BusError("payload does not match schema " + schema.name);
  }
  for (const auto& f : schema.fields) {
    const auto field = payload.fields.find(f.name);
    const bool ok = field != payload.fields.end() &&
                    (f.kind == FieldKind::number ? std::holds_alternative<double>(field->second)
                                                 : std::holds_alternative<std::vector<double>>(field->second));
    if (!ok) throw BusError("payload field " + f.name + " does not match schema " + schema.name);
  }
}

void Bus::advertise(NodeId node, std::string topic) {
  std::lock_guard lock(mutex_);
  auto& rec = record(node);
  const bool known = std::any_of(rec.publications.begin(), rec.publications.end(),
                                 [&topic](const Publication& p) { return p.declared == topic; });
  if (known) return;
  topics_.try_emplace(topic);
  rec.publications.push_back({topic, topic});
}

std::size_t Bus::publish(NodeId node, std::string_view topic, Payload payload) {
  std::lock_guard lock(mutex_);
  auto& rec = record(node);
  if (rec.lifecycle != Lifecycle::running) {
    throw BusError("node " + rec.name + " is not running and cannot publish");
  }
  auto pub = std::find_if(rec.publications.begin(), rec.publications.end(),
                          [topic](const Publication& p) { return p.declared == topic; });
  if (pub == rec.publications.end()) {
    rec.publications.push_back({std::string(topic), std::string(topic)});
    pub = std::prev(rec.publications.end());
  }
  check_payload(payload);
  const std::string bound = pub->bound;
  Topic& t = topics_[bound];
  if (t.schema.empty()) {
    t.schema = payload.schema;
  } else if (t.schema != payload.schema) {
    throw BusError("topic " + bound + " carries " + t.schema + ", not " + payload.schema);
  }
  Message msg{bound, std::move(payload), ++t.seq};
  const std::string publisher = rec.name;  // callbacks may grow nodes_

  std::size_t delivered = 0;
  // Index loop: a callback may subscribe and grow the vector.
  for (std::size_t i = 0; i < subscriptions_.size(); ++i) {
    if (subscriptions_[i].topic != bound) continue;
    if (nodes_[subscriptions_[i].node.value].lifecycle != Lifecycle::running) continue;
    const std::shared_ptr<const Callback> cb = subscriptions_[i].callback;
    ++subscriptions_[i].delivered;
    ++delivered;
    if (cb && *cb) (*cb)(msg);
  }
  emit({BusEvent::Kind::publish, publisher, bound, msg.payload.schema, msg.seq, delivered});
  return delivered;
}

SubscriptionId Bus::subscribe(NodeId node, std::string topic, Callback callback) {
  std::lock_guard lock(mutex_);
  record(node);
  topics_.try_emplace(topic);
  subscriptions_.push_back({node, std::move(topic), std::make_shared<const Callback>(std::move(callback)), 0});
  return SubscriptionId{subscriptions_.size() - 1};
}

void Bus::replace_callback(SubscriptionId sub, Callback callback) {
  std::lock_guard lock(mutex_);
  if (sub.value >= subscriptions_.size()) throw BusError("unknown subscription");
  subscriptions_[sub.value].callback = std::make_shared<const Callback>(std::move(callback));
}

std::uint64_t Bus::delivered_count(SubscriptionId sub) const {
  std::lock_guard lock(mutex_);
  if (sub.value >= subscriptions_.size()) throw BusError("unknown subscription");
  return subscriptions_[sub.value].delivered;
}

std::string Bus::subscription_topic(SubscriptionId sub) const {
  std::lock_guard lock(mutex_);
  if (sub.value >= subscriptions_.size()) throw BusError("unknown subscription");
  return subscriptions_[sub.value].topic;
}

void Bus::set_param(NodeId node, std::string name, ParamValue value) {
  std::lock_guard lock(mutex_);
  auto& rec = record(node);
  emit({BusEvent::Kind::param, rec.name, {}, name, 0, 0});
  rec.params.insert_or_assign(std::move(name), std::move(value));
}

std::optional<ParamValue> Bus::get_param(NodeId node, std::string_view name) const {
  std::lock_guard lock(mutex_);
  const auto& params = record(node).params;
  const auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

void Bus::remap(NodeId node, Role role, std::string_view old_topic, std::string new_topic) {
  std::lock_guard lock(mutex_);
  auto& rec = record(node);
  if (old_topic == new_topic) return;
  bool moved = false;
  if (role == Role::subscription) {
    for (auto& s : subscriptions_) {
      if (s.node == node && s.topic == old_topic) {
        s.topic = new_topic;
        moved = true;
      }
    }
  } else {
    for (auto& p : rec.publications) {
      if (p.bound == old_topic) {
        p.bound = new_topic;
        moved = true;
      }
    }
  }
  if (!moved) {
    throw BusError("node " + rec.name + " has no " +
                   (role == Role::subscription ? "subscription" : "publication") + " on " +
                   std::string(old_topic));
  }
  topics_.try_emplace(new_topic);
  emit({BusEvent::Kind::remap, rec.name, new_topic,
        std::string(role == Role::subscription ? "subscription " : "publication ") + std::string(old_topic), 0, 0});
}

void Bus::set_trace_hook(std::function<void(const BusEvent&)> hook) {
  std::lock_guard lock(mutex_);
  trace_hook_ = std::move(hook);
}

GraphView Bus::graph() const {
  std::lock_guard lock(mutex_);
  GraphView g;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeView v{nodes_[i].name, nodes_[i].lifecycle, {}, {}};
    for (const auto& s : subscriptions_) {
      if (s.node.value == i) v.subscribed.push_back(s.topic);
    }
    for (const auto& p : nodes_[i].publications) v.published.push_back(p.bound);
    g.nodes.push_back(std::move(v));
  }
  for (const auto& [name, t] : topics_) g.topics.push_back({name, t.schema, t.seq});
  return g;
}

}  // namespace lrp::bus
