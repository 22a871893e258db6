#pragma once

// In-process node/topic graph. Nodes can be started and stopped repeatedly,
// parameters changed, callbacks swapped, and topic bindings remapped while
// everything else keeps running.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lrp::bus {

struct NodeId {
  std::size_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct SubscriptionId {
  std::size_t value = 0;
  auto operator<=>(const SubscriptionId&) const = default;
};

enum class Lifecycle { created, running, stopped };
std::string_view to_string(Lifecycle l) noexcept;

enum class Role { subscription, publication };

enum class FieldKind { number, number_list };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::number;
};

struct Schema {
  std::string name;
  std::vector<FieldSpec> fields;
};

using FieldValue = std::variant<double, std::vector<double>>;

struct Payload {
  std::string schema;
  std::map<std::string, FieldValue> fields;

  /// nullopt when the field is absent or not a number.
  std::optional<double> number(std::string_view field) const;
  const std::vector<double>* list(std::string_view field) const;
};

struct Message {
  std::string topic;
  Payload payload;
  std::uint64_t seq = 0;  // strictly increasing per topic
};

using Callback = std::function<void(const Message&)>;
using ParamValue = std::variant<double, bool, std::string>;

struct BusEvent {
  enum class Kind { publish, lifecycle, remap, param };
  Kind kind = Kind::publish;
  std::string node;
  std::string topic;   // publish: topic; remap: new topic
  std::string detail;  // lifecycle: new state; remap: role and old topic; param: name
  std::uint64_t seq = 0;
  std::size_t delivered = 0;
};

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeView {
  std::string name;
  Lifecycle lifecycle = Lifecycle::created;
  std::vector<std::string> subscribed;
  std::vector<std::string> published;
};

struct TopicView {
  std::string name;
  std::string schema;  // empty until the first publish
  std::uint64_t last_seq = 0;
};

struct GraphView {
  std::vector<NodeView> nodes;
  std::vector<TopicView> topics;
};

/// Schemas `cmd_vel`, `pose`, and `laser` are registered on construction.
/// Every member function is safe to call from any thread and from inside a
/// callback; delivery is synchronous on the publisher's call.
class Bus {
 public:
  Bus();
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  void register_schema(Schema schema);

  NodeId create_node(std::string name);
  std::optional<NodeId> find_node(std::string_view name) const;
  std::string node_name(NodeId node) const;
  Lifecycle lifecycle(NodeId node) const;

  void start(NodeId node);
  void stop(NodeId node);
  void start_all(std::span<const NodeId> nodes);
  void stop_all(std::span<const NodeId> nodes);

  /// Declares a publication without publishing; publish() also declares.
  void advertise(NodeId node, std::string topic);

  /// Returns the number of callbacks invoked.
  std::size_t publish(NodeId node, std::string_view topic, Payload payload);

  SubscriptionId subscribe(NodeId node, std::string topic, Callback callback);
  void replace_callback(SubscriptionId sub, Callback callback);
  std::uint64_t delivered_count(SubscriptionId sub) const;
  std::string subscription_topic(SubscriptionId sub) const;

  void set_param(NodeId node, std::string name, ParamValue value);
  std::optional<ParamValue> get_param(NodeId node, std::string_view name) const;

  /// Moves every binding of `node` in `role` from old_topic to new_topic.
  void remap(NodeId node, Role role, std::string_view old_topic, std::string new_topic);

  void set_trace_hook(std::function<void(const BusEvent&)> hook);

  GraphView graph() const;

 private:
  struct Subscription {
    NodeId node;
    std::string topic;
    std::shared_ptr<const Callback> callback;
    std::uint64_t delivered = 0;
  };
  struct Publication {
    std::string declared;  // topic name the node code uses
    std::string bound;     // topic it currently reaches
  };
  struct NodeRecord {
    std::string name;
    Lifecycle lifecycle = Lifecycle::created;
    std::vector<Publication> publications;
    std::map<std::string, ParamValue, std::less<>> params;
  };
  struct Topic {
    std::string schema;
    std::uint64_t seq = 0;
  };

  NodeRecord& record(NodeId node);
  const NodeRecord& record(NodeId node) const;
  void check_payload(const Payload& payload) const;
  void emit(BusEvent event) const;
  void set_lifecycle(NodeId node, Lifecycle next);

  mutable std::recursive_mutex mutex_;
  std::map<std::string, Schema, std::less<>> schemas_;
  std::vector<NodeRecord> nodes_;
  std::vector<Subscription> subscriptions_;  // subscription order
  std::map<std::string, Topic, std::less<>> topics_;
  std::function<void(const BusEvent&)> trace_hook_;
};

}  // namespace lrp::bus
