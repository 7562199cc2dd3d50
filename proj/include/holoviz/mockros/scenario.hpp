#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holoviz/bridge/messages.hpp"
#include "holoviz/geom.hpp"

namespace holoviz::mockros {

using geom::Vec3d;

struct ScenarioError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ScenarioName { Nav, OccludedIntent, Handover };

const char* to_string(ScenarioName n);
/// nav | occluded_intent | handover; throws ScenarioError.
ScenarioName scenario_from_string(const std::string& name);

struct Topics {
  std::string tf = "/tf";
  std::string goal = "/move_base_simple/goal";
  std::string markers = "/visualization_marker_array";
  std::string robot_pose = "/robot_pose";
  std::string command = "/handover/command";
  std::string object_markers = "/handover/object_markers";
  std::string grasp_pose = "/handover/grasp_pose";
};

struct ScenarioScript {
  ScenarioName name = ScenarioName::Nav;
  double speed = 0.5;          ///< m/s
  double max_yaw_rate = 1.0;   ///< rad/s
  double tf_rate = 30;         ///< Hz, wall clock
  double marker_rate = 10;     ///< Hz, simulated clock
  double handover_rate = 10;   ///< Hz, simulated clock
  std::string fixed_frame = "map";
  std::string robot_frame = "base_link";
  Topics topics;
  /// occluded_intent drives through these in order.
  std::vector<Vec3d> waypoints{{8, 0, 0}, {8, 4, 0}, {0, 4, 0}};
  int grid_lines = 11;         ///< per axis
  double grid_spacing = 1.0;

  /// Throws ScenarioError on non-positive rates or speed.
  void validate() const;
};

struct RobotState {
  Vec3d position = Vec3d::Zero();
  double yaw = 0;
};

struct Goal {
  Vec3d position = Vec3d::Zero();
  double yaw = 0;
};

Goal goal_from_pose(const bridge::PoseStamped& pose);

/// Point robot kinematics: moves straight toward the goal position at up to
/// `speed` and turns toward the goal heading at up to `max_yaw_rate`. Never
/// overshoots either.
RobotState nav_step(const RobotState& state, const Goal& goal, double speed, double max_yaw_rate, double dt);
RobotState nav_step(const RobotState& state, const bridge::PoseStamped& goal, const ScenarioScript& script, double dt);

bool reached(const RobotState& state, const Goal& goal, double tolerance = 1e-6);

struct HandoverState {
  bool active = false;
  double elapsed = 0;     ///< simulated seconds since start
  int executions = 0;
};

/// Event fed to handover_step: either a received command or elapsed time.
struct HandoverEvent {
  std::optional<std::string> command;
  double dt = 0;
};

/// Idle until "start"; a repeated "start" while active is ignored, "stop"
/// returns to idle.
HandoverState handover_step(const HandoverState& state, const HandoverEvent& event);

/// The handed-over object (a box) at a given time since start.
geom::Transformd object_pose(double elapsed);
Vec3d object_size();

/// Twelve two-point LINE_LIST markers, one per box edge.
bridge::MarkerArray wireframe_markers(const geom::Transformd& object, const std::string& frame, Stamp stamp);
bridge::PoseStamped grasp_pose(const geom::Transformd& object, const std::string& frame, Stamp stamp);

/// Motion-intent ARROW from the robot to the goal.
bridge::Marker intent_marker(const RobotState& robot, const Goal& goal, const std::string& frame, Stamp stamp);
bridge::Marker intent_delete(const std::string& frame, Stamp stamp);
/// Square floor grid centred on the origin as one LINE_LIST.
bridge::Marker grid_marker(int lines, double spacing, const std::string& frame, Stamp stamp);

inline constexpr const char* kIntentNs = "intent";
inline constexpr const char* kGridNs = "grid";
inline constexpr const char* kObjectNs = "object";
inline constexpr int kWireframeEdges = 12;

}  // namespace holoviz::mockros
