#include "holoviz/plugins/types.hpp"

#include <cmath>

namespace holoviz::plugins {

namespace {

Vec3d vec_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw InvalidInput(where + " must be [x, y, z]");
  }
  Vec3d v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!geom::all_finite(v)) throw InvalidInput(where + " must be finite");
  return v;
}

Json vec_json(const Vec3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json ray_json(const Ray& r) {
  Json j;
  j["origin"] = vec_json(r.origin);
  j["direction"] = vec_json(r.direction);
  return j;
}

Ray ray_from(const Json& j) {
  if (!j.is_object()) throw InvalidInput("ray must be an object");
  Ray r{vec_from(j.at("origin"), "ray.origin"), vec_from(j.at("direction"), "ray.direction")};
  if (r.direction.norm() == 0) throw InvalidInput("ray.direction must be nonzero");
  return r;
}

}  // namespace

const char* to_string(PluginKind k) { return k == PluginKind::Display ? "display" : "tool"; }

const char* to_string(PluginType t) {
  switch (t) {
    case PluginType::TfDisplay: return "TfDisplay";
    case PluginType::MarkerArrayDisplay: return "MarkerArrayDisplay";
    case PluginType::StampedPoseDisplay: return "StampedPoseDisplay";
    case PluginType::Arrow2dTool: return "Arrow2dTool";
    case PluginType::CommandTool: return "CommandTool";
  }
  return "?";
}

PluginType plugin_type_from_string(const std::string& name) {
  for (auto t : {PluginType::TfDisplay, PluginType::MarkerArrayDisplay, PluginType::StampedPoseDisplay,
                 PluginType::Arrow2dTool, PluginType::CommandTool}) {
    if (name == to_string(t)) return t;
  }
  throw UnknownType("unknown plugin type '" + name + "'");
}

PluginKind kind_of(PluginType t) {
  return (t == PluginType::Arrow2dTool || t == PluginType::CommandTool) ? PluginKind::Tool : PluginKind::Display;
}

Json to_json(const PluginDescriptor& d) {
  Json j;
  j["id"] = d.id;
  j["type"] = to_string(d.type);
  j["kind"] = to_string(d.kind());
  j["topic"] = d.topic;
  j["enabled"] = d.enabled;
  j["settings"] = d.settings;
  return j;
}

PluginDescriptor descriptor_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SettingsError(where + ": expected object");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "type" && key != "kind" && key != "topic" && key != "enabled" && key != "settings") {
      throw SettingsError(where + "." + key + ": unknown field");
    }
  }
  PluginDescriptor d;
  if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
    throw SettingsError(where + ".id: required nonempty string");
  }
  d.id = j.at("id").get<std::string>();
  if (!j.contains("type") || !j.at("type").is_string()) throw SettingsError(where + ".type: required string");
  try {
    d.type = plugin_type_from_string(j.at("type").get<std::string>());
  } catch (const UnknownType& e) {
    throw UnknownType(where + ".type: " + e.what());
  }
  if (j.contains("topic")) {
    if (!j.at("topic").is_string()) throw SettingsError(where + ".topic: expected string");
    d.topic = j.at("topic").get<std::string>();
  }
  if (j.contains("enabled")) {
    if (!j.at("enabled").is_boolean()) throw SettingsError(where + ".enabled: expected boolean");
    d.enabled = j.at("enabled").get<bool>();
  }
  if (j.contains("settings")) {
    if (!j.at("settings").is_object()) throw SettingsError(where + ".settings: expected object");
    d.settings = j.at("settings");
  }
  if (d.type != PluginType::TfDisplay && d.topic.empty()) throw SettingsError(where + ".topic: required for " + to_string(d.type));
  return d;
}

InputEvent InputEvent::ray_move(const Vec3d& origin, const Vec3d& direction) {
  InputEvent ev;
  ev.variant = Variant::RayMove;
  ev.ray = Ray{origin, direction};
  return ev;
}

InputEvent InputEvent::tap(const Vec3d& origin, const Vec3d& direction) {
  InputEvent ev;
  ev.variant = Variant::Tap;
  ev.ray = Ray{origin, direction};
  return ev;
}

InputEvent InputEvent::spoken(std::string command) {
  InputEvent ev;
  ev.variant = Variant::Command;
  ev.command = std::move(command);
  return ev;
}

InputEvent InputEvent::menu_action(std::string plugin, std::string action, Json value) {
  InputEvent ev;
  ev.variant = Variant::MenuAction;
  ev.menu = MenuAction{std::move(plugin), std::move(action), std::move(value)};
  return ev;
}

InputEvent InputEvent::sighting(const align::MarkerDetection& det) {
  InputEvent ev;
  ev.variant = Variant::Detection;
  ev.detection = det;
  return ev;
}

const char* to_string(InputEvent::Variant v) {
  switch (v) {
    case InputEvent::Variant::RayMove: return "RayMove";
    case InputEvent::Variant::Tap: return "Tap";
    case InputEvent::Variant::Command: return "Command";
    case InputEvent::Variant::MenuAction: return "MenuAction";
    case InputEvent::Variant::Detection: return "Detection";
  }
  return "?";
}

Json to_json(const geom::Transformd& t) {
  const auto& q = t.rotation;
  Json j;
  j["translation"] = vec_json(t.translation);
  j["rotation"] = Json::array({q.x(), q.y(), q.z(), q.w()});
  return j;
}

geom::Transformd transform_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("transform must be an object");
  const Vec3d t = j.contains("translation") ? vec_from(j.at("translation"), "translation") : Vec3d::Zero();
  geom::UnitQuatd r;
  if (j.contains("rotation")) {
    const Json& q = j.at("rotation");
    if (!q.is_array() || q.size() != 4) throw InvalidInput("rotation must be [x, y, z, w]");
    const double x = q[0].get<double>(), y = q[1].get<double>(), z = q[2].get<double>(), w = q[3].get<double>();
    const double n = std::sqrt(x * x + y * y + z * z + w * w);
    if (!(std::abs(n - 1) < 1e-3)) throw InvalidInput("rotation must be a unit quaternion");
    r = geom::UnitQuatd(x, y, z, w);
  }
  return geom::Transformd(t, r);
}

Json to_json(const InputEvent& ev) {
  Json j;
  j["variant"] = to_string(ev.variant);
  switch (ev.variant) {
    case InputEvent::Variant::RayMove:
    case InputEvent::Variant::Tap:
      j["ray"] = ray_json(ev.ray);
      break;
    case InputEvent::Variant::Command:
      j["command"] = ev.command;
      break;
    case InputEvent::Variant::MenuAction:
      j["menu"] = {{"plugin", ev.menu.plugin}, {"action", ev.menu.action}, {"value", ev.menu.value}};
      break;
    case InputEvent::Variant::Detection:
      j["detection"] = {{"marker_in_device", to_json(ev.detection.marker_in_device)},
                        {"device_in_vwcs", to_json(ev.detection.device_in_vwcs)},
                        {"stamp", ev.detection.stamp.seconds()}};
      break;
  }
  if (ev.target) j["target"] = *ev.target;
  return j;
}

InputEvent input_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("variant") || !j.at("variant").is_string()) {
    throw InvalidInput("input event needs a string 'variant'");
  }
  const std::string variant = j.at("variant").get<std::string>();
  InputEvent ev;
  try {
    if (variant == "RayMove" || variant == "Tap") {
      ev.variant = variant == "Tap" ? InputEvent::Variant::Tap : InputEvent::Variant::RayMove;
      if (!j.contains("ray")) throw InvalidInput(variant + " needs a ray");
      ev.ray = ray_from(j.at("ray"));
    } else if (variant == "Command") {
      ev.variant = InputEvent::Variant::Command;
      ev.command = j.at("command").get<std::string>();
    } else if (variant == "MenuAction") {
      ev.variant = InputEvent::Variant::MenuAction;
      const Json& m = j.at("menu");
      ev.menu = MenuAction{m.at("plugin").get<std::string>(), m.at("action").get<std::string>(),
                           m.contains("value") ? m.at("value") : Json(nullptr)};
    } else if (variant == "Detection") {
      ev.variant = InputEvent::Variant::Detection;
      const Json& d = j.at("detection");
      ev.detection.marker_in_device = transform_from_json(d.at("marker_in_device"));
      ev.detection.device_in_vwcs = transform_from_json(d.at("device_in_vwcs"));
      ev.detection.stamp = Stamp::from_seconds(d.value("stamp", 0.0));
    } else {
      throw InvalidInput("unknown input variant '" + variant + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(variant + ": " + e.what());
  }
  if (j.contains("target")) {
    if (!j.at("target").is_string()) throw InvalidInput("target must be a string");
    ev.target = j.at("target").get<std::string>();
  }
  return ev;
}

}  // namespace holoviz::plugins
