#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "holoviz/align.hpp"
#include "holoviz/geom.hpp"

namespace holoviz::plugins {

using geom::Vec3d;
using Json = nlohmann::ordered_json;

struct PluginError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DuplicateId : PluginError {
  using PluginError::PluginError;
};
struct UnknownType : PluginError {
  using PluginError::PluginError;
};
struct UnknownId : PluginError {
  using PluginError::PluginError;
};
struct SettingsError : PluginError {
  using PluginError::PluginError;
};
struct InvalidAction : PluginError {
  using PluginError::PluginError;
};
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class PluginKind { Display, Tool };
enum class PluginType { TfDisplay, MarkerArrayDisplay, StampedPoseDisplay, Arrow2dTool, CommandTool };

const char* to_string(PluginKind k);
const char* to_string(PluginType t);
/// Throws UnknownType.
PluginType plugin_type_from_string(const std::string& name);
PluginKind kind_of(PluginType t);

struct PluginDescriptor {
  std::string id;
  PluginType type = PluginType::TfDisplay;
  std::string topic;  ///< unused by TfDisplay
  bool enabled = true;
  Json settings = Json::object();

  PluginKind kind() const { return kind_of(type); }
  friend bool operator==(const PluginDescriptor&, const PluginDescriptor&) = default;
};

Json to_json(const PluginDescriptor& d);
/// Throws SettingsError / UnknownType with `where` as the field path prefix.
PluginDescriptor descriptor_from_json(const Json& j, const std::string& where = "plugin");

struct Status {
  std::string level;  ///< info | warning | error
  std::string source;
  std::string message;
};

struct Ray {
  Vec3d origin = Vec3d::Zero();
  Vec3d direction = -Vec3d::UnitZ();
};

struct MenuAction {
  std::string plugin;
  std::string action;  ///< set_enabled | set_visibility | set_topic | reset
  Json value;
};

/// Human input in world coordinates. Detection carries a fiducial sighting
/// for the alignment solver rather than a plugin event.
struct InputEvent {
  enum class Variant { RayMove, Tap, Command, MenuAction, Detection };

  Variant variant = Variant::Tap;
  Ray ray;
  std::string command;
  MenuAction menu;
  align::MarkerDetection detection;
  /// Route to one tool instead of every enabled tool of the matching kind.
  std::optional<std::string> target;

  static InputEvent ray_move(const Vec3d& origin, const Vec3d& direction);
  static InputEvent tap(const Vec3d& origin, const Vec3d& direction);
  static InputEvent spoken(std::string command);
  static InputEvent menu_action(std::string plugin, std::string action, Json value = nullptr);
  static InputEvent sighting(const align::MarkerDetection& det);
};

const char* to_string(InputEvent::Variant v);
Json to_json(const InputEvent& ev);
/// Throws InvalidInput, e.g. for a zero ray direction.
InputEvent input_from_json(const Json& j);

Json to_json(const geom::Transformd& t);
geom::Transformd transform_from_json(const Json& j);

}  // namespace holoviz::plugins
