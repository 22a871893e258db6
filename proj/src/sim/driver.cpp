#include "lrp/driver.hpp"

namespace lrp::sim {

Driver::Driver(bus::Bus& bus, World world, RobotState initial, double dt, std::string name)
    : bus_(bus), world_(std::move(world)), initial_(initial), robot_(initial), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("driver dt must be positive");
  node_ = bus_.create_node(std::move(name));
  bus_.advertise(node_, msg::kPoseTopic);
  bus_.advertise(node_, msg::kLaserTopic);
  bus_.subscribe(node_, msg::kCommandVelocityTopic, [this](const bus::Message& m) {
    const auto cmd = msg::cmd_vel_from(m.payload);
    if (!cmd) {
      if (sink_) {
        sink_(Diagnostic{Severity::warning, "malformed-command", "ignored malformed command on " + m.topic,
                         bus_.node_name(node_), 0, 0});
      }
      return;
    }
    robot_.v = cmd->linear;
    robot_.omega = cmd->angular;
  });
  bus_.start(node_);
}

void Driver::tick() {
  if (bus_.lifecycle(node_) != bus::Lifecycle::running) return;
  robot_ = step(robot_, world_, dt_);
  publish_state();
}

void Driver::publish_state() {
  if (bus_.lifecycle(node_) != bus::Lifecycle::running) return;
  last_scan_ = scan(world_, robot_);
  bus_.publish(node_, msg::kPoseTopic, msg::to_payload(msg::Pose2D{robot_.x, robot_.y, robot_.theta}));
  bus_.publish(node_, msg::kLaserTopic, msg::to_payload(last_scan_));
}

void Driver::reset() {
  robot_.x = initial_.x;
  robot_.y = initial_.y;
  robot_.theta = initial_.theta;
  robot_.collided = false;
}

}  // namespace lrp::sim
