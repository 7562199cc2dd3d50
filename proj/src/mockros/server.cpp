#include "holoviz/mockros/server.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace holoviz::mockros {

using bridge::BridgeOp;
using bridge::Json;
using bridge::OpKind;

MockRos::MockRos(const net::Endpoint& bind, ScenarioScript script, ServerOptions options)
    : script_(std::move(script)), options_(options) {
  script_.validate();
  if (!(options_.time_scale > 0)) throw ScenarioError("time scale must be positive");
  if (script_.name == ScenarioName::OccludedIntent) goal_ = Goal{script_.waypoints.front(), 0};
  server_ = std::make_unique<net::Server>(
      bind, [this](std::shared_ptr<net::Channel> ch) { accept(std::move(ch)); },
      [this](const std::string& method, const std::string& target) {
        net::HttpResponse r;
        if (method == "GET" && target.rfind("/introspection", 0) == 0) {
          r.status = 200;
          r.content_type = "application/json";
          r.body = introspection().dump();
        }
        return r;
      });
  loop_ = std::thread([this] { loop(); });
}

MockRos::~MockRos() { stop(); }

void MockRos::stop() {
  {
    std::lock_guard lock(state_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  wake_.notify_all();
  if (loop_.joinable()) loop_.join();
  server_->stop();
  std::lock_guard lock(clients_mutex_);
  clients_.clear();
}

std::uint16_t MockRos::port() const { return server_->port(); }

std::string MockRos::url() const { return "ws://127.0.0.1:" + std::to_string(port()); }

void MockRos::accept(std::shared_ptr<net::Channel> channel) {
  std::uint64_t id;
  {
    std::lock_guard lock(clients_mutex_);
    id = next_client_++;
    clients_[id] = Client{channel, ClientInfo{id, channel->peer(), {}, {}}};
  }
  channel->start([this, id](std::string&& text) { on_message(id, std::move(text)); },
                 [this, id] {
                   std::lock_guard lock(clients_mutex_);
                   clients_.erase(id);
                 });
  send_to(id, BridgeOp::status("info", std::string("mockros ") + to_string(script_.name) + " ready"));
}

void MockRos::send_to(std::uint64_t id, const BridgeOp& op) {
  std::lock_guard lock(clients_mutex_);
  if (auto it = clients_.find(id); it != clients_.end()) it->second.channel->send(bridge::encode(op));
}

void MockRos::on_message(std::uint64_t id, std::string&& text) {
  BridgeOp op;
  try {
    op = bridge::decode(text);
  } catch (const bridge::UnsupportedOp& e) {
    send_to(id, BridgeOp::status("error", "op '" + e.op + "' is not supported by mockros", e.id));
    return;
  } catch (const bridge::DecodeError& e) {
    send_to(id, BridgeOp::status("error", std::string("bad envelope: ") + e.what()));
    return;
  }

  switch (op.op) {
    case OpKind::Subscribe:
    case OpKind::Unsubscribe:
    case OpKind::Advertise:
    case OpKind::Unadvertise: {
      std::lock_guard lock(clients_mutex_);
      auto it = clients_.find(id);
      if (it == clients_.end()) return;
      auto& info = it->second.info;
      if (op.op == OpKind::Subscribe) info.subscriptions[op.topic] = op.type;
      if (op.op == OpKind::Unsubscribe) info.subscriptions.erase(op.topic);
      if (op.op == OpKind::Advertise) info.advertisements[op.topic] = op.type;
      if (op.op == OpKind::Unadvertise) info.advertisements.erase(op.topic);
      return;
    }
    case OpKind::Publish: {
      {
        std::lock_guard lock(clients_mutex_);
        received_.push_back(op);
      }
      try {
        on_client_publish(op);
      } catch (const bridge::DecodeError& e) {
        send_to(id, BridgeOp::status("error", "publish on " + op.topic + ": " + e.what()));
        return;
      }
      fan_out(op.topic, op.msg);
      return;
    }
    case OpKind::Status:
      return;
  }
}

void MockRos::on_client_publish(const BridgeOp& op) {
  const auto& topics = script_.topics;
  if (op.topic == topics.goal && script_.name == ScenarioName::Nav) {
    const auto goal = bridge::from_json<bridge::PoseStamped>(op.msg);
    std::lock_guard lock(state_mutex_);
    goal_ = goal_from_pose(goal);
    spdlog::info("new goal ({:.3f}, {:.3f}) yaw {:.3f}", goal_->position.x(), goal_->position.y(), goal_->yaw);
  } else if (op.topic == topics.command) {
    const auto cmd = bridge::from_json<bridge::CommandString>(op.msg);
    std::lock_guard lock(state_mutex_);
    pending_commands_.push_back(cmd.data);
  }
}

void MockRos::fan_out(const std::string& topic, const Json& msg) {
  const auto bytes = std::make_shared<const std::string>(bridge::encode(BridgeOp::publish(topic, msg)));
  std::lock_guard lock(clients_mutex_);
  ++published_[topic];
  for (auto& [id, c] : clients_) {
    if (c.info.subscriptions.count(topic)) c.channel->send(bytes);
  }
}

void MockRos::publish(const std::string& topic, const Json& msg) { fan_out(topic, msg); }

void MockRos::loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / script_.tf_rate));
  const double dt = options_.time_scale / script_.tf_rate;
  auto deadline = clock::now();
  for (;;) {
    Stamp now;
    {
      std::unique_lock lock(state_mutex_);
      if (wake_.wait_until(lock, deadline, [this] { return stopping_; })) return;
      sim_time_ += dt;
      now = Stamp{options_.epoch.nanoseconds + Stamp::from_seconds(sim_time_).nanoseconds};
    }
    step(dt, now);
    deadline += period;
    // Fell far behind (debugger, suspended process): resynchronize.
    if (clock::now() - deadline > 10 * period) deadline = clock::now();
  }
}

void MockRos::step(double dt, Stamp now) {
  std::vector<std::pair<std::string, Json>> out;
  const auto& topics = script_.topics;
  auto next_seq = [this](const std::string& topic) {
    std::lock_guard lock(clients_mutex_);
    return ++seq_[topic];
  };

  {
    std::lock_guard lock(state_mutex_);
    for (const auto& cmd : std::exchange(pending_commands_, {})) {
      const bool was_active = handover_.active;
      handover_ = handover_step(handover_, HandoverEvent{cmd, 0});
      if (handover_.active && !was_active) next_handover_ = sim_time_;
      if (!handover_.active && was_active) {
        bridge::Marker clear;
        clear.header.frame_id = script_.fixed_frame;
        clear.header.stamp = now;
        clear.action = bridge::MarkerAction::DeleteAll;
        out.emplace_back(topics.object_markers, bridge::to_json(bridge::MarkerArray{{clear}}));
      }
    }
    handover_ = handover_step(handover_, HandoverEvent{std::nullopt, dt});

    // Integrate in small substeps so the converge bound holds at any time scale.
    const int substeps = std::max(1, static_cast<int>(std::ceil(dt / 0.01)));
    for (int i = 0; i < substeps && goal_; ++i) {
      robot_ = nav_step(robot_, *goal_, script_.speed, script_.max_yaw_rate, dt / substeps);
      if (reached(robot_, *goal_)) {
        if (script_.name == ScenarioName::OccludedIntent && waypoint_ + 1 < script_.waypoints.size()) {
          goal_ = Goal{script_.waypoints[++waypoint_], 0};
        } else {
          goal_.reset();
        }
      }
    }

    txgraph::StampedTransform tf{script_.fixed_frame, script_.robot_frame, now,
                                 geom::Transformd(robot_.position, geom::UnitQuatd::from_yaw(robot_.yaw))};
    out.emplace_back(topics.tf, Json{{"transforms", Json::array({bridge::to_json(tf, next_seq(topics.tf))})}});

    const double eps = 1e-9;
    if (script_.name != ScenarioName::Handover && sim_time_ + eps >= next_marker_) {
      next_marker_ = sim_time_ + 1.0 / script_.marker_rate;
      bridge::MarkerArray markers;
      markers.markers.push_back(grid_marker(script_.grid_lines, script_.grid_spacing, script_.fixed_frame, now));
      if (goal_) {
        markers.markers.push_back(intent_marker(robot_, *goal_, script_.fixed_frame, now));
        intent_shown_ = true;
      } else if (intent_shown_) {
        markers.markers.push_back(intent_delete(script_.fixed_frame, now));
        intent_shown_ = false;
      }
      for (auto& m : markers.markers) m.header.seq = next_seq(topics.markers);
      out.emplace_back(topics.markers, bridge::to_json(markers));

      bridge::PoseStamped pose;
      pose.header = bridge::Header{next_seq(topics.robot_pose), now, script_.fixed_frame};
      pose.pose = tf.transform;
      out.emplace_back(topics.robot_pose, bridge::to_json(pose));
    }

    if (handover_.active && sim_time_ + eps >= next_handover_) {
      next_handover_ = sim_time_ + 1.0 / script_.handover_rate;
      const auto object = object_pose(handover_.elapsed);
      auto wire = wireframe_markers(object, script_.fixed_frame, now);
      for (auto& m : wire.markers) m.header.seq = next_seq(topics.object_markers);
      out.emplace_back(topics.object_markers, bridge::to_json(wire));
      auto grasp = grasp_pose(object, script_.fixed_frame, now);
      grasp.header.seq = next_seq(topics.grasp_pose);
      out.emplace_back(topics.grasp_pose, bridge::to_json(grasp));
    }
  }

  for (const auto& [topic, msg] : out) fan_out(topic, msg);
}

std::vector<MockRos::ClientInfo> MockRos::clients() const {
  std::lock_guard lock(clients_mutex_);
  std::vector<ClientInfo> out;
  for (const auto& [id, c] : clients_) out.push_back(c.info);
  return out;
}

Json MockRos::introspection() const {
  Json clients = Json::array();
  for (const auto& c : this->clients()) {
    Json subs = Json::array(), ads = Json::array();
    for (const auto& [topic, type] : c.subscriptions) subs.push_back({{"topic", topic}, {"type", type}});
    for (const auto& [topic, type] : c.advertisements) ads.push_back({{"topic", topic}, {"type", type}});
    clients.push_back({{"id", c.id}, {"peer", c.peer}, {"subscriptions", subs}, {"advertisements", ads}});
  }
  Json j;
  j["scenario"] = to_string(script_.name);
  j["sim_time"] = sim_time();
  j["clients"] = clients;
  return j;
}

std::set<std::string> MockRos::subscribed_topics() const {
  std::set<std::string> out;
  for (const auto& c : clients()) {
    for (const auto& [topic, type] : c.subscriptions) out.insert(topic);
  }
  return out;
}

RobotState MockRos::robot() const {
  std::lock_guard lock(state_mutex_);
  return robot_;
}

std::optional<Goal> MockRos::goal() const {
  std::lock_guard lock(state_mutex_);
  return goal_;
}

HandoverState MockRos::handover() const {
  std::lock_guard lock(state_mutex_);
  return handover_;
}

double MockRos::sim_time() const {
  std::lock_guard lock(state_mutex_);
  return sim_time_;
}

std::size_t MockRos::published_count(const std::string& topic) const {
  std::lock_guard lock(clients_mutex_);
  auto it = published_.find(topic);
  return it == published_.end() ? 0 : it->second;
}

std::vector<BridgeOp> MockRos::received() const {
  std::lock_guard lock(clients_mutex_);
  return received_;
}

}  // namespace holoviz::mockros
