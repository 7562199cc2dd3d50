#include "holoviz/mockros/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace holoviz::mockros {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2 * std::numbers::pi); }

bridge::Header header(const std::string& frame, Stamp stamp) { return bridge::Header{0, stamp, frame}; }

}  // namespace

const char* to_string(ScenarioName n) {
  switch (n) {
    case ScenarioName::Nav: return "nav";
    case ScenarioName::OccludedIntent: return "occluded_intent";
    case ScenarioName::Handover: return "handover";
  }
  return "?";
}

ScenarioName scenario_from_string(const std::string& name) {
  for (auto n : {ScenarioName::Nav, ScenarioName::OccludedIntent, ScenarioName::Handover}) {
    if (name == to_string(n)) return n;
  }
  throw ScenarioError("unknown scenario '" + name + "' (expected nav, occluded_intent or handover)");
}

void ScenarioScript::validate() const {
  if (!(speed > 0)) throw ScenarioError("speed must be positive");
  if (!(max_yaw_rate > 0)) throw ScenarioError("max yaw rate must be positive");
  if (!(tf_rate > 0) || !(marker_rate > 0) || !(handover_rate > 0)) throw ScenarioError("rates must be positive");
  if (name == ScenarioName::OccludedIntent && waypoints.empty()) throw ScenarioError("occluded_intent needs waypoints");
  if (grid_lines < 2 || !(grid_spacing > 0)) throw ScenarioError("grid needs at least 2 lines and positive spacing");
}

Goal goal_from_pose(const bridge::PoseStamped& pose) {
  return Goal{Vec3d(pose.pose.translation.x(), pose.pose.translation.y(), 0), pose.pose.rotation.yaw()};
}

RobotState nav_step(const RobotState& state, const Goal& goal, double speed, double max_yaw_rate, double dt) {
  RobotState next = state;
  const Vec3d to_goal = goal.position - state.position;
  const double distance = to_goal.norm();
  const double reach = speed * dt;
  if (distance <= reach) {
    next.position = goal.position;
  } else {
    next.position = state.position + to_goal * (reach / distance);
  }
  const double turn = wrap_angle(goal.yaw - state.yaw);
  const double max_turn = max_yaw_rate * dt;
  next.yaw = wrap_angle(state.yaw + std::clamp(turn, -max_turn, max_turn));
  if (std::abs(turn) <= max_turn) next.yaw = goal.yaw;
  return next;
}

RobotState nav_step(const RobotState& state, const bridge::PoseStamped& goal, const ScenarioScript& script, double dt) {
  return nav_step(state, goal_from_pose(goal), script.speed, script.max_yaw_rate, dt);
}

bool reached(const RobotState& state, const Goal& goal, double tolerance) {
  return (goal.position - state.position).norm() <= tolerance && std::abs(wrap_angle(goal.yaw - state.yaw)) <= tolerance;
}

HandoverState handover_step(const HandoverState& state, const HandoverEvent& event) {
  HandoverState next = state;
  if (event.command) {
    if (*event.command == "start" && !state.active) {
      next.active = true;
      next.elapsed = 0;
      ++next.executions;
    } else if (*event.command == "stop") {
      next.active = false;
    }
  }
  if (next.active && event.dt > 0) next.elapsed += event.dt;
  return next;
}

geom::Transformd object_pose(double elapsed) {
  const double sway = 0.05 * std::sin(elapsed);
  return geom::Transformd(Vec3d(1.0 + sway, 0.5, 1.0), geom::UnitQuatd::from_yaw(0.3 * std::sin(0.5 * elapsed)));
}

Vec3d object_size() { return Vec3d(0.2, 0.1, 0.3); }

bridge::MarkerArray wireframe_markers(const geom::Transformd& object, const std::string& frame, Stamp stamp) {
  const Vec3d h = object_size() / 2;
  auto corner = [&](int i) {
    return Vec3d((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  };
  bridge::MarkerArray out;
  int id = 0;
  for (int a = 0; a < 8; ++a) {
    for (int bit : {1, 2, 4}) {
      if (a & bit) continue;
      bridge::Marker m;
      m.header = header(frame, stamp);
      m.ns = kObjectNs;
      m.id = id++;
      m.type = bridge::MarkerType::LineList;
      m.pose = object;
      m.scale = Vec3d(0.01, 0, 0);
      m.color = bridge::Rgba{0.1, 0.8, 1.0, 1.0};
      m.points = {corner(a), corner(a | bit)};
      out.markers.push_back(std::move(m));
    }
  }
  return out;
}

bridge::PoseStamped grasp_pose(const geom::Transformd& object, const std::string& frame, Stamp stamp) {
  bridge::PoseStamped p;
  p.header = header(frame, stamp);
  const auto down = geom::UnitQuatd::from_axis_angle(Vec3d::UnitY(), std::numbers::pi);
  p.pose = object * geom::Transformd(Vec3d(0, 0, object_size().z() / 2 + 0.05), down);
  return p;
}

bridge::Marker intent_marker(const RobotState& robot, const Goal& goal, const std::string& frame, Stamp stamp) {
  bridge::Marker m;
  m.header = header(frame, stamp);
  m.ns = kIntentNs;
  m.id = 0;
  m.type = bridge::MarkerType::Arrow;
  m.scale = Vec3d(0.05, 0.1, 0.15);
  m.color = bridge::Rgba{1.0, 0.5, 0.0, 0.9};
  m.points = {robot.position, goal.position};
  return m;
}

bridge::Marker intent_delete(const std::string& frame, Stamp stamp) {
  bridge::Marker m;
  m.header = header(frame, stamp);
  m.ns = kIntentNs;
  m.id = 0;
  m.type = bridge::MarkerType::Arrow;
  m.action = bridge::MarkerAction::Delete;
  return m;
}

bridge::Marker grid_marker(int lines, double spacing, const std::string& frame, Stamp stamp) {
  bridge::Marker m;
  m.header = header(frame, stamp);
  m.ns = kGridNs;
  m.id = 0;
  m.type = bridge::MarkerType::LineList;
  m.scale = Vec3d(0.01, 0, 0);
  m.color = bridge::Rgba{0.6, 0.6, 0.6, 0.5};
  const double half = spacing * (lines - 1) / 2;
  for (int i = 0; i < lines; ++i) {
    const double c = -half + i * spacing;
    m.points.emplace_back(c, -half, 0);
    m.points.emplace_back(c, half, 0);
    m.points.emplace_back(-half, c, 0);
    m.points.emplace_back(half, c, 0);
  }
  return m;
}

}  // namespace holoviz::mockros
